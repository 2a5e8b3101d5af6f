#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "qtomo/errors.hpp"
#include "qtomo/image.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

enum class PhantomKind { disk, two_disks, random_blobs, checker };

inline PhantomKind phantom_kind_from_string(const std::string& s) {
    if (s == "disk") return PhantomKind::disk;
    if (s == "two_disks") return PhantomKind::two_disks;
    if (s == "random_blobs") return PhantomKind::random_blobs;
    if (s == "checker") return PhantomKind::checker;
    throw InvalidArgument("unknown phantom kind: " + s);
}

inline const char* to_string(PhantomKind kind) {
    switch (kind) {
        case PhantomKind::disk: return "disk";
        case PhantomKind::two_disks: return "two_disks";
        case PhantomKind::random_blobs: return "random_blobs";
        case PhantomKind::checker: return "checker";
    }
    return "?";
}

namespace detail {

// Stamp pixels with centre distance < radius from (crow, ccol). Strict <
// keeps a radius of zero empty.
inline void stamp_disk(BinaryImage& img, double crow, double ccol, double radius) {
    for (int i = 0; i < img.height; ++i) {
        for (int j = 0; j < img.width; ++j) {
            const double di = i - crow;
            const double dj = j - ccol;
            if (di * di + dj * dj < radius * radius) img.at(i, j) = 1;
        }
    }
}

} // namespace detail

// Deterministic synthetic masks. Output is a pure function of the
// arguments: the same (kind, dims, seed) always yields the same bytes.
// Disk kinds stay strictly inside the grid so every border row and column
// is background.
inline BinaryImage generate_phantom(PhantomKind kind, int width, int height,
                                    std::uint64_t seed) {
    if (width < 1 || height < 1)
        throw InvalidArgument("phantom dimensions must be >= 1");
    BinaryImage img(width, height, 0);
    const double m = static_cast<double>(std::min(width, height));
    const double crow = 0.5 * (height - 1);
    const double ccol = 0.5 * (width - 1);

    switch (kind) {
        case PhantomKind::disk: {
            const double radius = std::min(std::round(0.3 * m), 0.5 * (m - 1.0));
            detail::stamp_disk(img, crow, ccol, radius);
            break;
        }
        case PhantomKind::two_disks: {
            const double cl = 0.28 * (width - 1);
            const double cr = 0.72 * (width - 1);
            double radius = std::round(0.18 * m);
            radius = std::min({radius, crow, cl, (width - 1) - cr});
            detail::stamp_disk(img, crow, cl, radius);
            detail::stamp_disk(img, crow, cr, radius);
            break;
        }
        case PhantomKind::random_blobs: {
            SplitMix64 rng(seed);
            for (int b = 0; b < 3; ++b) {
                // Fixed draw count per blob keeps the stream layout
                // independent of which blobs fit.
                const double u1 = rng.next_double();
                const double u2 = rng.next_double();
                const double u3 = rng.next_double();
                const double radius = (0.1 + 0.1 * u1) * m;
                const double row_span = (height - 1) - 2.0 * radius;
                const double col_span = (width - 1) - 2.0 * radius;
                if (row_span < 0.0 || col_span < 0.0) continue;
                detail::stamp_disk(img, radius + u2 * row_span, radius + u3 * col_span,
                                   radius);
            }
            break;
        }
        case PhantomKind::checker: {
            for (int i = 0; i < height; ++i)
                for (int j = 0; j < width; ++j) img.at(i, j) = ((i + j) % 2 == 0) ? 1 : 0;
            break;
        }
        default:
            throw InvalidArgument("unknown phantom kind");
    }
    return img;
}

// Pointwise alpha * mask. Exact: every output value is either 0 or alpha.
inline GridImage scale_binary(const BinaryImage& mask, double alpha) {
    if (!(alpha >= 0.0))
        throw InvalidArgument("alpha must be >= 0");
    GridImage out(mask.width, mask.height, 0.0);
    for (std::size_t p = 0; p < mask.size(); ++p)
        out.values[p] = mask.mask[p] ? alpha : 0.0;
    return out;
}

} // namespace qtomo
