#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/geometry.hpp"
#include "qtomo/image.hpp"

namespace qtomo {

// Projection values indexed by (angle, detector bin), row = angle.
struct Sinogram {
    ProjectionGeometry geometry;
    std::vector<double> values;

    Sinogram() = default;

    explicit Sinogram(ProjectionGeometry g, double fill = 0.0) : geometry(std::move(g)) {
        geometry.validate();
        values.assign(static_cast<std::size_t>(geometry.num_angles()) * geometry.bin_count,
                      fill);
    }

    int num_angles() const { return geometry.num_angles(); }
    int num_bins() const { return geometry.bin_count; }

    double& at(int angle, int bin) {
        return values[static_cast<std::size_t>(angle) * geometry.bin_count + bin];
    }
    double at(int angle, int bin) const {
        return values[static_cast<std::size_t>(angle) * geometry.bin_count + bin];
    }

    double sum() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }

    bool same_shape(const Sinogram& other) const {
        return geometry.num_angles() == other.geometry.num_angles() &&
               geometry.bin_count == other.geometry.bin_count;
    }
};

// Weight model for system-matrix construction. area_overlap computes the
// exact pixel/strip intersection area by polygon clipping; subsample(k)
// approximates it by classifying k x k subpixel centres and serves as the
// independent oracle for the exact path.
struct WeightModel {
    enum class Kind { area_overlap, subsample };

    Kind kind = Kind::area_overlap;
    int subsample_k = 1;

    static WeightModel area_overlap() { return {Kind::area_overlap, 1}; }

    static WeightModel subsample(int k) {
        if (k < 1)
            throw InvalidArgument("subsample count must be >= 1");
        return {Kind::subsample, k};
    }
};

// Sparse pixel-to-ray weights c in [0, 1]. One entry list per (angle, bin)
// ray; entries are sorted by pixel index and zero weights are not stored.
struct SystemMatrix {
    struct Entry {
        std::uint32_t pixel;
        double weight;
    };

    ProjectionGeometry geometry;
    int image_width = 0;
    int image_height = 0;
    std::vector<std::vector<Entry>> rays; // index: angle * bin_count + bin

    int num_rays() const { return static_cast<int>(rays.size()); }

    const std::vector<Entry>& ray(int angle, int bin) const {
        return rays[static_cast<std::size_t>(angle) * geometry.bin_count + bin];
    }
};

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kWeightDropTol = 1e-12;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

// Pixel (row, col) centre in detector coordinates: x to the right, y up,
// image centred on the rotation axis.
inline double pixel_x(int col, int width) { return col - 0.5 * (width - 1); }
inline double pixel_y(int row, int height) { return 0.5 * (height - 1) - row; }

// Small convex polygon buffer; clipping a quad against two half-planes
// yields at most 8 vertices.
struct ConvexPoly {
    std::array<double, 8> xs{};
    std::array<double, 8> ys{};
    int n = 0;

    void push(double x, double y) {
        xs[static_cast<std::size_t>(n)] = x;
        ys[static_cast<std::size_t>(n)] = y;
        ++n;
    }
};

// Sutherland-Hodgman step: keep the part of `in` with
// sign * (x*cs + y*sn - bound) <= 0.
inline void clip_by_projection(const ConvexPoly& in, double cs, double sn, double bound,
                               double sign, ConvexPoly& out) {
    out.n = 0;
    for (int i = 0; i < in.n; ++i) {
        const int j = (i + 1 == in.n) ? 0 : i + 1;
        const double si = sign * (in.xs[i] * cs + in.ys[i] * sn - bound);
        const double sj = sign * (in.xs[j] * cs + in.ys[j] * sn - bound);
        if (si <= 0.0) out.push(in.xs[i], in.ys[i]);
        if ((si < 0.0) != (sj < 0.0) && si != sj) {
            const double t = si / (si - sj);
            out.push(in.xs[i] + t * (in.xs[j] - in.xs[i]),
                     in.ys[i] + t * (in.ys[j] - in.ys[i]));
        }
    }
}

inline double polygon_area(const ConvexPoly& p) {
    double a = 0.0;
    for (int i = 0; i < p.n; ++i) {
        const int j = (i + 1 == p.n) ? 0 : i + 1;
        a += p.xs[i] * p.ys[j] - p.xs[j] * p.ys[i];
    }
    return 0.5 * std::abs(a);
}

// Exact area of the unit pixel square centred at (px, py) intersected with
// the detector strip lo <= x*cs + y*sn <= hi.
inline double pixel_strip_overlap(double px, double py, double cs, double sn, double lo,
                                  double hi) {
    ConvexPoly square;
    square.push(px - 0.5, py - 0.5);
    square.push(px + 0.5, py - 0.5);
    square.push(px + 0.5, py + 0.5);
    square.push(px - 0.5, py + 0.5);
    ConvexPoly a, b;
    clip_by_projection(square, cs, sn, lo, -1.0, a);
    if (a.n < 3) return 0.0;
    clip_by_projection(a, cs, sn, hi, +1.0, b);
    if (b.n < 3) return 0.0;
    return polygon_area(b);
}

// Fraction of k x k subpixel centres with lo <= s < hi (half-open, so a
// centre on a shared bin edge is counted exactly once).
inline double pixel_strip_subsample(double px, double py, double cs, double sn, double lo,
                                    double hi, int k) {
    long hits = 0;
    const double step = 1.0 / k;
    for (int a = 0; a < k; ++a) {
        const double y = py - 0.5 + (a + 0.5) * step;
        for (int b = 0; b < k; ++b) {
            const double x = px - 0.5 + (b + 0.5) * step;
            const double s = x * cs + y * sn;
            if (s >= lo && s < hi) ++hits;
        }
    }
    return static_cast<double>(hits) / (static_cast<double>(k) * k);
}

} // namespace detail

// Subsampling oracle for a single (pixel, angle, bin) weight. Converges to
// the exact overlap area as k grows.
inline double reference_weight(int pixel, double angle_deg, int bin,
                               const ProjectionGeometry& geom, int width, int height,
                               int k) {
    if (k < 1)
        throw InvalidArgument("subsample count must be >= 1");
    if (pixel < 0 || pixel >= width * height)
        throw InvalidArgument("pixel index out of range");
    if (bin < 0 || bin >= geom.bin_count)
        throw InvalidArgument("bin index out of range");
    const int row = pixel / width;
    const int col = pixel % width;
    const double rad = detail::deg_to_rad(angle_deg);
    return detail::pixel_strip_subsample(detail::pixel_x(col, width),
                                         detail::pixel_y(row, height), std::cos(rad),
                                         std::sin(rad), geom.bin_lo(bin), geom.bin_hi(bin),
                                         k);
}

inline SystemMatrix build_system_matrix(const ProjectionGeometry& geom, int width,
                                        int height,
                                        const WeightModel& model = WeightModel::area_overlap()) {
    geom.validate();
    if (width < 1 || height < 1)
        throw InvalidArgument("image dimensions must be >= 1");
    if (model.kind == WeightModel::Kind::subsample && model.subsample_k < 1)
        throw InvalidArgument("subsample count must be >= 1");

    SystemMatrix sm;
    sm.geometry = geom;
    sm.image_width = width;
    sm.image_height = height;
    sm.rays.assign(static_cast<std::size_t>(geom.num_angles()) * geom.bin_count, {});

    for (int a = 0; a < geom.num_angles(); ++a) {
        const double rad = detail::deg_to_rad(geom.angles_deg[a]);
        const double cs = std::cos(rad);
        const double sn = std::sin(rad);
        // Half-extent of a unit square's footprint on the detector axis.
        const double half = 0.5 * (std::abs(cs) + std::abs(sn));
        const std::size_t base = static_cast<std::size_t>(a) * geom.bin_count;

        std::uint32_t pixel = 0;
        for (int i = 0; i < height; ++i) {
            const double py = detail::pixel_y(i, height);
            for (int j = 0; j < width; ++j, ++pixel) {
                const double px = detail::pixel_x(j, width);
                const double sc = px * cs + py * sn;
                int b = static_cast<int>(std::floor(
                    (sc - half - geom.detector_offset) / geom.bin_width + 0.5 * geom.bin_count));
                if (b < 0) b = 0;
                for (; b < geom.bin_count && geom.bin_lo(b) < sc + half; ++b) {
                    const double lo = geom.bin_lo(b);
                    const double hi = geom.bin_hi(b);
                    const double w =
                        (model.kind == WeightModel::Kind::area_overlap)
                            ? detail::pixel_strip_overlap(px, py, cs, sn, lo, hi)
                            : detail::pixel_strip_subsample(px, py, cs, sn, lo, hi,
                                                            model.subsample_k);
                    if (w > detail::kWeightDropTol)
                        sm.rays[base + b].push_back({pixel, w});
                }
            }
        }
    }
    return sm;
}

// out(angle, bin) = sum_p c[angle,bin,p] * img[p]. Linear in img.
inline Sinogram forward_project(const SystemMatrix& sm, const GridImage& img) {
    if (img.width != sm.image_width || img.height != sm.image_height)
        throw DimensionError("image dimensions do not match system matrix");
    Sinogram out(sm.geometry, 0.0);
    for (std::size_t r = 0; r < sm.rays.size(); ++r) {
        double acc = 0.0;
        for (const auto& e : sm.rays[r]) acc += e.weight * img.values[e.pixel];
        out.values[r] = acc;
    }
    return out;
}

// Exact adjoint of forward_project: out[p] = sum_rays c * sino(angle, bin).
inline GridImage back_project(const SystemMatrix& sm, const Sinogram& sino) {
    if (sino.num_angles() != sm.geometry.num_angles() ||
        sino.num_bins() != sm.geometry.bin_count)
        throw DimensionError("sinogram dimensions do not match system matrix");
    GridImage out(sm.image_width, sm.image_height, 0.0);
    for (std::size_t r = 0; r < sm.rays.size(); ++r) {
        const double v = sino.values[r];
        for (const auto& e : sm.rays[r]) out.values[e.pixel] += e.weight * v;
    }
    return out;
}

} // namespace qtomo
