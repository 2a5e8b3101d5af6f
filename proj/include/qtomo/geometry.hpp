#pragma once

#include <cmath>
#include <vector>

#include "qtomo/errors.hpp"

namespace qtomo {

// Parallel-beam acquisition layout. Angles are in degrees in [0, 180),
// strictly increasing. The detector is a row of bin_count bins of width
// bin_width (in pixel units) whose midpoint sits at detector_offset from
// the rotation axis.
struct ProjectionGeometry {
    std::vector<double> angles_deg;
    int bin_count = 0;
    double bin_width = 1.0;
    double detector_offset = 0.0;

    int num_angles() const { return static_cast<int>(angles_deg.size()); }

    // Lower edge of bin b in detector coordinates. bin_hi(b) is defined as
    // bin_lo(b + 1) so adjacent strips share the exact same boundary value
    // and tile the detector without floating-point gaps.
    double bin_lo(int b) const {
        return detector_offset + (static_cast<double>(b) - 0.5 * bin_count) * bin_width;
    }
    double bin_hi(int b) const { return bin_lo(b + 1); }

    void validate() const {
        if (angles_deg.empty())
            throw InvalidArgument("geometry needs at least one angle");
        for (std::size_t i = 0; i < angles_deg.size(); ++i) {
            const double a = angles_deg[i];
            if (!(a >= 0.0 && a < 180.0))
                throw InvalidArgument("projection angles must lie in [0, 180)");
            if (i > 0 && !(a > angles_deg[i - 1]))
                throw InvalidArgument("projection angles must be strictly increasing");
        }
        if (bin_count < 1)
            throw InvalidArgument("bin_count must be >= 1");
        if (!(bin_width > 0.0))
            throw InvalidArgument("bin_width must be > 0");
        if (!std::isfinite(detector_offset))
            throw InvalidArgument("detector_offset must be finite");
    }
};

// num_angles equally spaced angles 0, d, ..., 180 - d with d = 180 / num_angles.
inline std::vector<double> uniform_angles(int num_angles) {
    if (num_angles < 1)
        throw InvalidArgument("need at least one angle");
    std::vector<double> angles(num_angles);
    const double step = 180.0 / num_angles;
    for (int i = 0; i < num_angles; ++i) angles[i] = i * step;
    return angles;
}

// Unit-width detector wide enough to cover the rotated footprint of a
// width x height image at every angle: ceil(hypot(W, H)) bins centred on
// the rotation axis.
inline ProjectionGeometry default_geometry(int width, int height, int num_angles) {
    if (width < 1 || height < 1)
        throw InvalidArgument("image dimensions must be >= 1");
    ProjectionGeometry g;
    g.angles_deg = uniform_angles(num_angles);
    g.bin_count = static_cast<int>(std::ceil(std::hypot(static_cast<double>(width),
                                                        static_cast<double>(height))));
    g.bin_width = 1.0;
    g.detector_offset = 0.0;
    return g;
}

// Material encoding for segmentation: strictly increasing positive
// attenuation levels plus an optional one-hot penalty weight (0 disables).
struct AttenuationSpec {
    std::vector<double> levels;
    double one_hot_penalty = 0.0;

    void validate() const {
        if (levels.empty())
            throw InvalidArgument("attenuation levels must be non-empty");
        double prev = 0.0;
        for (double a : levels) {
            if (!(a > 0.0) || !std::isfinite(a))
                throw InvalidArgument("attenuation levels must be strictly positive");
            if (!(a > prev))
                throw InvalidArgument("attenuation levels must be strictly increasing");
            prev = a;
        }
        if (one_hot_penalty < 0.0 || !std::isfinite(one_hot_penalty))
            throw InvalidArgument("one_hot_penalty must be >= 0");
    }
};

} // namespace qtomo
