#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/image.hpp"
#include "qtomo/projection.hpp"

namespace qtomo {

// Which sinogram cells count as object-free space. border_columns(n) marks
// the n outermost detector bins on each side at every angle; explicit_mask
// takes an angle x bin {0,1} mask directly.
struct BackgroundRegion {
    enum class Kind { border_columns, explicit_mask };

    Kind kind = Kind::border_columns;
    int columns = 2;
    std::vector<std::uint8_t> mask;

    static BackgroundRegion border_columns(int n = 2) {
        if (n < 1)
            throw InvalidArgument("background region needs at least one border column");
        BackgroundRegion r;
        r.kind = Kind::border_columns;
        r.columns = n;
        return r;
    }

    static BackgroundRegion explicit_mask(std::vector<std::uint8_t> m) {
        BackgroundRegion r;
        r.kind = Kind::explicit_mask;
        r.mask = std::move(m);
        return r;
    }

    bool contains(int bin, int bin_count, std::size_t cell) const {
        if (kind == Kind::border_columns)
            return bin < columns || bin >= bin_count - columns;
        return mask[cell] != 0;
    }
};

// Beer-Lambert conversion: attenuation line integral = -ln(I / I0).
inline Sinogram intensity_to_attenuation(const Sinogram& proj, double i0) {
    if (!(i0 > 0.0))
        throw DomainError("reference intensity must be positive");
    Sinogram out = proj;
    for (double& v : out.values) {
        if (!(v > 0.0))
            throw DomainError("intensities must be positive");
        v = -std::log(v / i0);
    }
    return out;
}

// Subtracts the mean over the background region, then clamps negatives to 0
// (line integrals of a nonnegative image cannot be negative).
inline Sinogram background_subtract(const Sinogram& sino,
                                    const BackgroundRegion& region = BackgroundRegion::border_columns()) {
    if (region.kind == BackgroundRegion::Kind::explicit_mask &&
        region.mask.size() != sino.values.size())
        throw DimensionError("background mask does not match sinogram");

    const int bins = sino.num_bins();
    double sum = 0.0;
    long count = 0;
    for (std::size_t cell = 0; cell < sino.values.size(); ++cell) {
        if (region.contains(static_cast<int>(cell % bins), bins, cell)) {
            sum += sino.values[cell];
            ++count;
        }
    }
    if (count == 0)
        throw InvalidArgument("background region is empty");

    const double mean = sum / count;
    Sinogram out = sino;
    for (double& v : out.values) {
        v -= mean;
        if (v < 0.0) v = 0.0;
    }
    return out;
}

enum class NormalizeMode { per_angle_sum_to_mean };

// Rescales each angle row so every per-angle sum equals the mean per-angle
// sum; the total sinogram sum is preserved.
inline Sinogram normalize_columns(const Sinogram& sino,
                                  NormalizeMode mode = NormalizeMode::per_angle_sum_to_mean) {
    (void)mode;
    const int angles = sino.num_angles();
    const int bins = sino.num_bins();
    std::vector<double> row_sums(static_cast<std::size_t>(angles), 0.0);
    for (int a = 0; a < angles; ++a) {
        double s = 0.0;
        for (int b = 0; b < bins; ++b) s += sino.at(a, b);
        if (!(s > 0.0))
            throw DegenerateRow("angle row has nonpositive sum");
        row_sums[static_cast<std::size_t>(a)] = s;
    }
    double mean = 0.0;
    for (double s : row_sums) mean += s;
    mean /= angles;

    Sinogram out = sino;
    for (int a = 0; a < angles; ++a) {
        const double scale = mean / row_sums[static_cast<std::size_t>(a)];
        for (int b = 0; b < bins; ++b) out.at(a, b) *= scale;
    }
    return out;
}

// Least-squares attenuation coefficient: the scalar a minimizing
// ||a * forward_project(sm, ref) - sino||^2.
inline double estimate_alpha(const Sinogram& sino, const SystemMatrix& sm,
                             const BinaryImage& reference) {
    if (sino.num_angles() != sm.geometry.num_angles() ||
        sino.num_bins() != sm.geometry.bin_count)
        throw DimensionError("sinogram dimensions do not match system matrix");
    if (reference.width != sm.image_width || reference.height != sm.image_height)
        throw DimensionError("reference dimensions do not match system matrix");

    GridImage ref_img(reference.width, reference.height, 0.0);
    for (std::size_t p = 0; p < reference.mask.size(); ++p)
        ref_img.values[p] = reference.mask[p];
    const Sinogram proj = forward_project(sm, ref_img);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < proj.values.size(); ++i) {
        num += proj.values[i] * sino.values[i];
        den += proj.values[i] * proj.values[i];
    }
    if (den == 0.0)
        throw DegenerateReference("reference projects to an all-zero sinogram");
    return num / den;
}

} // namespace qtomo
