#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/geometry.hpp"
#include "qtomo/image.hpp"
#include "qtomo/projection.hpp"

namespace qtomo {

// One bit per variable.
using Assignment = std::vector<std::uint8_t>;

// How binary variables map to pixel values.
//   segmentation:   pixel = sum_k levels[k] * q_k   (one bit per material level)
//   reconstruction: pixel = sum_k 2^k * q_k         (binary expansion, `bits` wide)
// Variable ids are pixel-major: var = pixel * bits_per_pixel + k.
struct EncodingSpec {
    enum class Mode { segmentation, reconstruction };

    Mode mode = Mode::segmentation;
    int image_width = 0;
    int image_height = 0;
    AttenuationSpec levels; // segmentation only
    int bits = 1;           // reconstruction only

    static EncodingSpec segmentation(int width, int height, AttenuationSpec spec) {
        if (width < 1 || height < 1)
            throw InvalidArgument("image dimensions must be >= 1");
        spec.validate();
        EncodingSpec e;
        e.mode = Mode::segmentation;
        e.image_width = width;
        e.image_height = height;
        e.levels = std::move(spec);
        e.bits = static_cast<int>(e.levels.levels.size());
        return e;
    }

    static EncodingSpec reconstruction(int width, int height, int bits) {
        if (width < 1 || height < 1)
            throw InvalidArgument("image dimensions must be >= 1");
        if (bits < 1 || bits > 30)
            throw InvalidArgument("bit count must be in [1, 30]");
        EncodingSpec e;
        e.mode = Mode::reconstruction;
        e.image_width = width;
        e.image_height = height;
        e.bits = bits;
        return e;
    }

    int bits_per_pixel() const {
        return mode == Mode::segmentation ? static_cast<int>(levels.levels.size()) : bits;
    }

    long num_pixels() const { return static_cast<long>(image_width) * image_height; }
    long num_vars() const { return num_pixels() * bits_per_pixel(); }

    long var_index(long pixel, int k) const { return pixel * bits_per_pixel() + k; }

    double level_value(int k) const {
        return mode == Mode::segmentation ? levels.levels[static_cast<std::size_t>(k)]
                                          : static_cast<double>(1u << k);
    }
};

// E(x) = sum_i linear[i] x_i + sum_{i<j} Q_ij x_i x_j. The constant term of
// the underlying least-squares objective (sum of squared sinogram values) is
// excluded from E and tracked in `offset`, so the residual it came from is
// always E(x) + offset and the energy floor is -offset.
struct QuboModel {
    struct QuadTerm {
        std::uint32_t i, j; // i < j
        double value;
    };
    struct AdjEntry {
        std::uint32_t other;
        double value;
    };

    long num_vars = 0;
    std::vector<double> linear; // dense; 0.0 means no term
    std::vector<QuadTerm> quadratic;
    double offset = 0.0;
    std::optional<EncodingSpec> layout;

    // Per-variable view of `quadratic` (each term listed under both ends),
    // rebuilt by finalize(); the annealer's inner loop reads only this.
    std::vector<std::size_t> adj_start;
    std::vector<AdjEntry> adj;

    // Sorts quadratic terms, drops negligible coefficients, and rebuilds the
    // adjacency lists. Builders and the file reader call this; hand-assembled
    // models must call it before use.
    void finalize(double drop_tol = 1e-12) {
        for (double& v : linear)
            if (std::abs(v) < drop_tol) v = 0.0;
        std::sort(quadratic.begin(), quadratic.end(), [](const QuadTerm& a, const QuadTerm& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        std::vector<QuadTerm> kept;
        kept.reserve(quadratic.size());
        for (const auto& t : quadratic)
            if (std::abs(t.value) >= drop_tol) kept.push_back(t);
        quadratic.swap(kept);

        std::vector<std::size_t> degree(static_cast<std::size_t>(num_vars) + 1, 0);
        for (const auto& t : quadratic) {
            ++degree[t.i];
            ++degree[t.j];
        }
        adj_start.assign(static_cast<std::size_t>(num_vars) + 1, 0);
        for (long v = 0; v < num_vars; ++v)
            adj_start[static_cast<std::size_t>(v) + 1] =
                adj_start[static_cast<std::size_t>(v)] + degree[static_cast<std::size_t>(v)];
        adj.resize(adj_start[static_cast<std::size_t>(num_vars)]);
        std::vector<std::size_t> cursor(adj_start.begin(), adj_start.end() - 1);
        for (const auto& t : quadratic) {
            adj[cursor[t.i]++] = {t.j, t.value};
            adj[cursor[t.j]++] = {t.i, t.value};
        }
    }
};

inline double energy(const QuboModel& model, const Assignment& x) {
    if (static_cast<long>(x.size()) != model.num_vars)
        throw DimensionError("assignment length does not match model");
    double e = 0.0;
    for (long i = 0; i < model.num_vars; ++i)
        if (x[static_cast<std::size_t>(i)])
            e += model.linear[static_cast<std::size_t>(i)];
    for (const auto& t : model.quadratic)
        if (x[t.i] && x[t.j]) e += t.value;
    return e;
}

// Sum of squared differences between the image's projection and the sinogram.
inline double residual(const SystemMatrix& sm, const Sinogram& sino, const GridImage& img) {
    if (sino.num_angles() != sm.geometry.num_angles() ||
        sino.num_bins() != sm.geometry.bin_count)
        throw DimensionError("sinogram dimensions do not match system matrix");
    const Sinogram proj = forward_project(sm, img);
    double r = 0.0;
    for (std::size_t i = 0; i < proj.values.size(); ++i) {
        const double d = proj.values[i] - sino.values[i];
        r += d * d;
    }
    return r;
}

inline GridImage decode(const Assignment& x, const EncodingSpec& enc) {
    if (static_cast<long>(x.size()) != enc.num_vars())
        throw DimensionError("assignment length does not match encoding");
    GridImage img(enc.image_width, enc.image_height, 0.0);
    const int bpp = enc.bits_per_pixel();
    for (long p = 0; p < enc.num_pixels(); ++p) {
        double v = 0.0;
        for (int k = 0; k < bpp; ++k)
            if (x[static_cast<std::size_t>(enc.var_index(p, k))]) v += enc.level_value(k);
        img.values[static_cast<std::size_t>(p)] = v;
    }
    return img;
}

// Exact right inverse of decode. Segmentation pixels must be 0 or exactly one
// of the levels; reconstruction pixels must be integers in [0, 2^bits).
inline Assignment encode(const GridImage& img, const EncodingSpec& enc) {
    if (img.width != enc.image_width || img.height != enc.image_height)
        throw DimensionError("image dimensions do not match encoding");
    const int bpp = enc.bits_per_pixel();
    Assignment x(static_cast<std::size_t>(enc.num_vars()), 0);
    for (long p = 0; p < enc.num_pixels(); ++p) {
        const double v = img.values[static_cast<std::size_t>(p)];
        if (enc.mode == EncodingSpec::Mode::segmentation) {
            if (v == 0.0) continue;
            int match = -1;
            for (int k = 0; k < bpp; ++k)
                if (v == enc.level_value(k)) {
                    match = k;
                    break;
                }
            if (match < 0)
                throw EncodingError("pixel value is not an encoding level");
            x[static_cast<std::size_t>(enc.var_index(p, match))] = 1;
        } else {
            if (v < 0.0 || v != std::floor(v) || v > static_cast<double>((1u << bpp) - 1))
                throw EncodingError("pixel value is not representable in the bit width");
            const unsigned u = static_cast<unsigned>(v);
            for (int k = 0; k < bpp; ++k)
                if (u & (1u << k)) x[static_cast<std::size_t>(enc.var_index(p, k))] = 1;
        }
    }
    return x;
}

// True when no pixel has more than one level bit set. Reconstruction
// assignments are unconstrained, so always valid.
inline bool one_hot_satisfied(const Assignment& x, const EncodingSpec& enc) {
    if (static_cast<long>(x.size()) != enc.num_vars())
        throw DimensionError("assignment length does not match encoding");
    if (enc.mode == EncodingSpec::Mode::reconstruction) return true;
    const int bpp = enc.bits_per_pixel();
    for (long p = 0; p < enc.num_pixels(); ++p) {
        int set = 0;
        for (int k = 0; k < bpp; ++k)
            set += x[static_cast<std::size_t>(enc.var_index(p, k))];
        if (set > 1) return false;
    }
    return true;
}

// Penalty weight large enough that setting a second level bit on any pixel
// always costs more than it can gain: 2 * max(level)^2 * max ray weight sum.
inline double auto_one_hot_penalty(const SystemMatrix& sm, const AttenuationSpec& spec) {
    spec.validate();
    double max_ray_sum = 0.0;
    for (const auto& ray : sm.rays) {
        double s = 0.0;
        for (const auto& e : ray) s += e.weight;
        max_ray_sum = std::max(max_ray_sum, s);
    }
    const double amax = spec.levels.back();
    return 2.0 * amax * amax * max_ray_sum;
}

namespace detail {

// Least-squares expansion of sum_rays (sum_v a_v q_v - s)^2 with q^2 = q:
//   linear  += a_v^2 - 2 s a_v
//   quad    += 2 a_v a_u            (v < u on the same ray)
//   offset  += s^2                  (excluded constant)
// Rays are processed in ascending (angle, bin) order and each pair key
// accumulates in that order, so coefficients are bitwise deterministic.
inline QuboModel build_qubo(const SystemMatrix& sm, const Sinogram& sino,
                            const EncodingSpec& enc) {
    if (sino.num_angles() != sm.geometry.num_angles() ||
        sino.num_bins() != sm.geometry.bin_count)
        throw DimensionError("sinogram dimensions do not match system matrix");
    if (enc.image_width != sm.image_width || enc.image_height != sm.image_height)
        throw DimensionError("encoding dimensions do not match system matrix");

    const int bpp = enc.bits_per_pixel();
    const long n = enc.num_vars();

    QuboModel model;
    model.num_vars = n;
    model.linear.assign(static_cast<std::size_t>(n), 0.0);
    model.layout = enc;

    std::unordered_map<std::uint64_t, double> quad;
    quad.reserve(static_cast<std::size_t>(n) * 4);

    std::vector<std::uint32_t> vars;
    std::vector<double> amps;
    for (std::size_t r = 0; r < sm.rays.size(); ++r) {
        const double s = sino.values[r];
        model.offset += s * s;
        const auto& ray = sm.rays[r];
        if (ray.empty()) continue;

        vars.clear();
        amps.clear();
        for (const auto& e : ray) {
            for (int k = 0; k < bpp; ++k) {
                vars.push_back(static_cast<std::uint32_t>(enc.var_index(e.pixel, k)));
                amps.push_back(e.weight * enc.level_value(k));
            }
        }
        for (std::size_t t = 0; t < vars.size(); ++t) {
            model.linear[vars[t]] += amps[t] * amps[t] - 2.0 * s * amps[t];
            for (std::size_t u = t + 1; u < vars.size(); ++u) {
                const std::uint64_t key =
                    static_cast<std::uint64_t>(vars[t]) * static_cast<std::uint64_t>(n) +
                    vars[u];
                quad[key] += 2.0 * amps[t] * amps[u];
            }
        }
    }

    if (enc.mode == EncodingSpec::Mode::segmentation && enc.levels.one_hot_penalty > 0.0 &&
        bpp > 1) {
        const double lambda = enc.levels.one_hot_penalty;
        for (long p = 0; p < enc.num_pixels(); ++p)
            for (int k = 0; k < bpp; ++k)
                for (int k2 = k + 1; k2 < bpp; ++k2) {
                    const std::uint64_t key =
                        static_cast<std::uint64_t>(enc.var_index(p, k)) *
                            static_cast<std::uint64_t>(n) +
                        static_cast<std::uint64_t>(enc.var_index(p, k2));
                    quad[key] += lambda;
                }
    }

    model.quadratic.reserve(quad.size());
    for (const auto& [key, value] : quad)
        model.quadratic.push_back({static_cast<std::uint32_t>(key / static_cast<std::uint64_t>(n)),
                                   static_cast<std::uint32_t>(key % static_cast<std::uint64_t>(n)),
                                   value});
    model.finalize();
    return model;
}

} // namespace detail

inline QuboModel build_segmentation_qubo(const SystemMatrix& sm, const Sinogram& sino,
                                         const EncodingSpec& enc) {
    if (enc.mode != EncodingSpec::Mode::segmentation)
        throw InvalidArgument("encoding is not in segmentation mode");
    return detail::build_qubo(sm, sino, enc);
}

inline QuboModel build_reconstruction_qubo(const SystemMatrix& sm, const Sinogram& sino,
                                           const EncodingSpec& enc) {
    if (enc.mode != EncodingSpec::Mode::reconstruction)
        throw InvalidArgument("encoding is not in reconstruction mode");
    return detail::build_qubo(sm, sino, enc);
}

} // namespace qtomo
