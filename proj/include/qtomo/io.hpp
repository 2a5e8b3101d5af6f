#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/geometry.hpp"
#include "qtomo/image.hpp"
#include "qtomo/projection.hpp"
#include "qtomo/qubo.hpp"

namespace qtomo {

namespace detail {

// Shortest decimal representation that parses back to the same bits.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, long line) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
        throw ParseError("expected a finite number, got '" + std::string(text) + "'", line);
    return v;
}

inline long parse_long(std::string_view text, long line) {
    long v = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError("expected an integer, got '" + std::string(text) + "'", line);
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Whitespace-separated tokens (any run of spaces/tabs).
inline std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open '" + path + "' for reading");
    return f;
}

// `key=value` field from a header line.
inline std::string_view header_field(std::string_view token, std::string_view key, long line) {
    if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
        token[key.size()] != '=')
        throw ParseError("expected '" + std::string(key) + "=<value>'", line);
    return token.substr(key.size() + 1);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Image CSV: `#image v1 width=W height=H`, then one comma-separated row of
// shortest round-trip decimals per image row.

inline void write_image_csv(const std::string& path, const GridImage& img) {
    auto f = detail::open_out(path);
    f << "#image v1 width=" << img.width << " height=" << img.height << "\n";
    for (int i = 0; i < img.height; ++i) {
        for (int j = 0; j < img.width; ++j) {
            if (j) f << ',';
            f << detail::format_double(img.at(i, j));
        }
        f << '\n';
    }
    if (!f)
        throw IoError("write failed for '" + path + "'");
}

inline GridImage read_image_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    long lineno = 1;
    if (!std::getline(f, line))
        throw ParseError("empty file", lineno);
    line = detail::strip_cr(line);
    const auto head = detail::tokens(line);
    if (head.size() != 4 || head[0] != "#image" || head[1] != "v1")
        throw ParseError("expected header '#image v1 width=W height=H'", lineno);
    const int width = static_cast<int>(
        detail::parse_long(detail::header_field(head[2], "width", lineno), lineno));
    const int height = static_cast<int>(
        detail::parse_long(detail::header_field(head[3], "height", lineno), lineno));
    if (width < 1 || height < 1)
        throw ParseError("image dimensions must be >= 1", lineno);

    GridImage img(width, height, 0.0);
    for (int i = 0; i < height; ++i) {
        ++lineno;
        if (!std::getline(f, line))
            throw ParseError("missing image row", lineno);
        line = detail::strip_cr(line);
        const auto cells = detail::split(line, ',');
        if (static_cast<int>(cells.size()) != width)
            throw ParseError("expected " + std::to_string(width) + " values", lineno);
        for (int j = 0; j < width; ++j) img.at(i, j) = detail::parse_double(cells[static_cast<std::size_t>(j)], lineno);
    }
    return img;
}

// ---------------------------------------------------------------------------
// Sinogram CSV: `#sinogram v1 bin_width=<v> detector_offset=<v>`, a column
// header `angle_deg,bin_0,...`, then one row per angle.

inline void write_sinogram_csv(const std::string& path, const Sinogram& sino) {
    auto f = detail::open_out(path);
    f << "#sinogram v1 bin_width=" << detail::format_double(sino.geometry.bin_width)
      << " detector_offset=" << detail::format_double(sino.geometry.detector_offset) << "\n";
    f << "angle_deg";
    for (int b = 0; b < sino.num_bins(); ++b) f << ",bin_" << b;
    f << '\n';
    for (int a = 0; a < sino.num_angles(); ++a) {
        f << detail::format_double(sino.geometry.angles_deg[static_cast<std::size_t>(a)]);
        for (int b = 0; b < sino.num_bins(); ++b) f << ',' << detail::format_double(sino.at(a, b));
        f << '\n';
    }
    if (!f)
        throw IoError("write failed for '" + path + "'");
}

inline Sinogram read_sinogram_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    long lineno = 1;
    if (!std::getline(f, line))
        throw ParseError("empty file", lineno);
    line = detail::strip_cr(line);
    const auto head = detail::tokens(line);
    if (head.size() != 4 || head[0] != "#sinogram" || head[1] != "v1")
        throw ParseError("expected header '#sinogram v1 bin_width=<v> detector_offset=<v>'",
                         lineno);
    const double bin_width = detail::parse_double(detail::header_field(head[2], "bin_width", lineno), lineno);
    const double detector_offset =
        detail::parse_double(detail::header_field(head[3], "detector_offset", lineno), lineno);

    ++lineno;
    if (!std::getline(f, line))
        throw ParseError("missing column header", lineno);
    line = detail::strip_cr(line);
    const auto cols = detail::split(line, ',');
    if (cols.size() < 2 || cols[0] != "angle_deg")
        throw ParseError("expected column header 'angle_deg,bin_0,...'", lineno);
    const int bins = static_cast<int>(cols.size()) - 1;

    std::vector<double> angles;
    std::vector<double> values;
    while (std::getline(f, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (static_cast<int>(cells.size()) != bins + 1)
            throw ParseError("expected " + std::to_string(bins + 1) + " values", lineno);
        angles.push_back(detail::parse_double(cells[0], lineno));
        for (int b = 0; b < bins; ++b)
            values.push_back(detail::parse_double(cells[static_cast<std::size_t>(b) + 1], lineno));
    }
    if (angles.empty())
        throw ParseError("sinogram has no angle rows", lineno);

    ProjectionGeometry geom;
    geom.angles_deg = std::move(angles);
    geom.bin_count = bins;
    geom.bin_width = bin_width;
    geom.detector_offset = detector_offset;
    geom.validate();
    Sinogram sino(geom, 0.0);
    sino.values = std::move(values);
    return sino;
}

// ---------------------------------------------------------------------------
// QUBO text format, byte-identical across write -> read -> write:
//   #version 1
//   #vars N
//   #offset <v>
//   #mode segmentation|reconstruction     (optional encoding block)
//   #dims W H
//   #levels a_1 ... | #bits m
//   #penalty <lambda>                      (segmentation only)
//   #layout pixel-major
//   i i value   (linear terms, ascending i, zeros omitted)
//   i j value   (quadratic terms, i < j, sorted)

inline void write_qubo(const std::string& path, const QuboModel& model) {
    auto f = detail::open_out(path);
    f << "#version 1\n";
    f << "#vars " << model.num_vars << "\n";
    f << "#offset " << detail::format_double(model.offset) << "\n";
    if (model.layout) {
        const EncodingSpec& enc = *model.layout;
        if (enc.mode == EncodingSpec::Mode::segmentation) {
            f << "#mode segmentation\n";
            f << "#dims " << enc.image_width << ' ' << enc.image_height << "\n";
            f << "#levels";
            for (double a : enc.levels.levels) f << ' ' << detail::format_double(a);
            f << "\n";
            f << "#penalty " << detail::format_double(enc.levels.one_hot_penalty) << "\n";
        } else {
            f << "#mode reconstruction\n";
            f << "#dims " << enc.image_width << ' ' << enc.image_height << "\n";
            f << "#bits " << enc.bits << "\n";
        }
        f << "#layout pixel-major\n";
    }
    for (long i = 0; i < model.num_vars; ++i) {
        const double v = model.linear[static_cast<std::size_t>(i)];
        if (v != 0.0) f << i << ' ' << i << ' ' << detail::format_double(v) << "\n";
    }
    for (const auto& t : model.quadratic)
        f << t.i << ' ' << t.j << ' ' << detail::format_double(t.value) << "\n";
    if (!f)
        throw IoError("write failed for '" + path + "'");
}

inline QuboModel read_qubo(const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    long lineno = 0;

    QuboModel model;
    bool have_version = false, have_vars = false, have_offset = false;
    EncodingSpec enc;
    bool have_mode = false, have_dims = false, have_values = false;
    double penalty = 0.0;
    std::vector<double> levels;
    int bits = 0;

    while (std::getline(f, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto tk = detail::tokens(line);
        if (tk.empty()) continue;

        if (tk[0][0] == '#') {
            if (tk[0] == "#version") {
                if (tk.size() != 2 || tk[1] != "1")
                    throw ParseError("unsupported format version", lineno);
                have_version = true;
            } else if (tk[0] == "#vars") {
                if (tk.size() != 2)
                    throw ParseError("expected '#vars N'", lineno);
                model.num_vars = detail::parse_long(tk[1], lineno);
                if (model.num_vars < 0)
                    throw ParseError("variable count must be >= 0", lineno);
                model.linear.assign(static_cast<std::size_t>(model.num_vars), 0.0);
                have_vars = true;
            } else if (tk[0] == "#offset") {
                if (tk.size() != 2)
                    throw ParseError("expected '#offset <value>'", lineno);
                model.offset = detail::parse_double(tk[1], lineno);
                have_offset = true;
            } else if (tk[0] == "#mode") {
                if (tk.size() != 2 || (tk[1] != "segmentation" && tk[1] != "reconstruction"))
                    throw ParseError("expected '#mode segmentation|reconstruction'", lineno);
                enc.mode = tk[1] == "segmentation" ? EncodingSpec::Mode::segmentation
                                                   : EncodingSpec::Mode::reconstruction;
                have_mode = true;
            } else if (tk[0] == "#dims") {
                if (tk.size() != 3)
                    throw ParseError("expected '#dims W H'", lineno);
                enc.image_width = static_cast<int>(detail::parse_long(tk[1], lineno));
                enc.image_height = static_cast<int>(detail::parse_long(tk[2], lineno));
                have_dims = true;
            } else if (tk[0] == "#levels") {
                if (tk.size() < 2)
                    throw ParseError("expected '#levels a_1 ...'", lineno);
                for (std::size_t i = 1; i < tk.size(); ++i)
                    levels.push_back(detail::parse_double(tk[i], lineno));
                have_values = true;
            } else if (tk[0] == "#bits") {
                if (tk.size() != 2)
                    throw ParseError("expected '#bits m'", lineno);
                bits = static_cast<int>(detail::parse_long(tk[1], lineno));
                have_values = true;
            } else if (tk[0] == "#penalty") {
                if (tk.size() != 2)
                    throw ParseError("expected '#penalty <value>'", lineno);
                penalty = detail::parse_double(tk[1], lineno);
            } else if (tk[0] == "#layout") {
                if (tk.size() != 2 || tk[1] != "pixel-major")
                    throw ParseError("unsupported variable layout", lineno);
            } else {
                throw ParseError("unknown header '" + std::string(tk[0]) + "'", lineno);
            }
            continue;
        }

        if (!have_version || !have_vars || !have_offset)
            throw ParseError("coefficient before complete header", lineno);
        if (tk.size() != 3)
            throw ParseError("expected 'i j value'", lineno);
        const long i = detail::parse_long(tk[0], lineno);
        const long j = detail::parse_long(tk[1], lineno);
        const double v = detail::parse_double(tk[2], lineno);
        if (i < 0 || j < 0 || i >= model.num_vars || j >= model.num_vars)
            throw ParseError("variable index out of range", lineno);
        if (i > j)
            throw ParseError("expected i <= j", lineno);
        if (i == j)
            model.linear[static_cast<std::size_t>(i)] += v;
        else
            model.quadratic.push_back(
                {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), v});
    }

    if (!have_version)
        throw ParseError("missing '#version 1' header", lineno == 0 ? 1 : lineno);
    if (!have_vars || !have_offset)
        throw ParseError("missing '#vars' or '#offset' header", lineno == 0 ? 1 : lineno);

    if (have_mode) {
        if (!have_dims || !have_values)
            throw ParseError("incomplete encoding block", lineno);
        if (enc.mode == EncodingSpec::Mode::segmentation) {
            AttenuationSpec spec;
            spec.levels = std::move(levels);
            spec.one_hot_penalty = penalty;
            model.layout = EncodingSpec::segmentation(enc.image_width, enc.image_height, spec);
        } else {
            model.layout = EncodingSpec::reconstruction(enc.image_width, enc.image_height, bits);
        }
        if (model.layout->num_vars() != model.num_vars)
            throw ParseError("encoding block does not match variable count", lineno);
    }

    // Preserve every stored coefficient so a rewrite is byte-identical.
    model.finalize(0.0);
    return model;
}

// ---------------------------------------------------------------------------
// PGM (P2): masks at maxval 1; grayscale min-max scaled to maxval 255.

inline void write_pgm_mask(const std::string& path, const BinaryImage& mask) {
    auto f = detail::open_out(path);
    f << "P2\n" << mask.width << ' ' << mask.height << "\n1\n";
    for (int i = 0; i < mask.height; ++i) {
        for (int j = 0; j < mask.width; ++j) {
            if (j) f << ' ';
            f << static_cast<int>(mask.at(i, j));
        }
        f << '\n';
    }
    if (!f)
        throw IoError("write failed for '" + path + "'");
}

inline void write_pgm_gray(const std::string& path, const GridImage& img) {
    double mn = img.values[0], mx = img.values[0];
    for (double v : img.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const double scale = mx > mn ? 255.0 / (mx - mn) : 0.0;
    auto f = detail::open_out(path);
    f << "P2\n" << img.width << ' ' << img.height << "\n255\n";
    for (int i = 0; i < img.height; ++i) {
        for (int j = 0; j < img.width; ++j) {
            if (j) f << ' ';
            f << static_cast<int>(std::lround((img.at(i, j) - mn) * scale));
        }
        f << '\n';
    }
    if (!f)
        throw IoError("write failed for '" + path + "'");
}

inline BinaryImage read_pgm_mask(const std::string& path) {
    auto f = detail::open_in(path);
    std::vector<long> fields;
    std::string line;
    long lineno = 0;
    bool saw_magic = false;
    while (std::getline(f, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        for (const auto t : detail::tokens(line)) {
            if (!saw_magic) {
                if (t != "P2")
                    throw ParseError("expected PGM magic 'P2'", lineno);
                saw_magic = true;
                continue;
            }
            fields.push_back(detail::parse_long(t, lineno));
        }
    }
    if (!saw_magic)
        throw ParseError("expected PGM magic 'P2'", 1);
    if (fields.size() < 3)
        throw ParseError("truncated PGM header", lineno == 0 ? 1 : lineno);
    const long w = fields[0], h = fields[1], maxval = fields[2];
    if (w < 1 || h < 1)
        throw ParseError("PGM dimensions must be >= 1", lineno);
    if (maxval < 1)
        throw ParseError("PGM maxval must be >= 1", lineno);
    if (static_cast<long>(fields.size()) != 3 + w * h)
        throw ParseError("PGM pixel count does not match dimensions", lineno);
    BinaryImage mask(static_cast<int>(w), static_cast<int>(h));
    for (long p = 0; p < w * h; ++p) {
        const long v = fields[static_cast<std::size_t>(p) + 3];
        if (v != 0 && v != maxval)
            throw ParseError("mask pixels must be 0 or maxval", lineno);
        mask.mask[static_cast<std::size_t>(p)] = v != 0;
    }
    return mask;
}

} // namespace qtomo
