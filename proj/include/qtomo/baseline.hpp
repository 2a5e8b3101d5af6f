#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/image.hpp"
#include "qtomo/projection.hpp"

namespace qtomo {

namespace detail {

// In-place iterative radix-2 FFT; n must be a power of two.
// inverse=true applies the conjugate transform and the 1/n factor.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Frequency-domain ramp filter of one detector row: response |f| with the
// DC term zeroed, applied on a row zero-padded to the next power of two
// >= twice its length (guards against convolution wrap-around).
inline void ramp_filter_row(const double* in, int bins, double bin_width, double* out) {
    const std::size_t n = next_pow2(static_cast<std::size_t>(bins) * 2);
    std::vector<std::complex<double>> buf(n, {0.0, 0.0});
    for (int b = 0; b < bins; ++b) buf[static_cast<std::size_t>(b)] = in[b];
    fft_pow2(buf, false);
    for (std::size_t k = 0; k < n; ++k) {
        const double cycles = static_cast<double>(std::min(k, n - k)) / static_cast<double>(n);
        buf[k] *= cycles / bin_width;
    }
    fft_pow2(buf, true);
    for (int b = 0; b < bins; ++b) out[b] = buf[static_cast<std::size_t>(b)].real();
}

} // namespace detail

enum class FbpFilter { ramp, none };

// Filtered back projection: ramp-filter each angle's detector row, back
// project, scale by pi / num_angles. filter=none skips the filtering and is
// exactly back_project scaled by pi / num_angles.
inline GridImage fbp_reconstruct(const Sinogram& sino, const SystemMatrix& sm,
                                 FbpFilter filter = FbpFilter::ramp) {
    if (sino.num_angles() != sm.geometry.num_angles() ||
        sino.num_bins() != sm.geometry.bin_count)
        throw DimensionError("sinogram dimensions do not match system matrix");

    const double scale = detail::kPi / sino.num_angles();
    if (filter == FbpFilter::none) {
        GridImage img = back_project(sm, sino);
        for (double& v : img.values) v *= scale;
        return img;
    }

    Sinogram filtered = sino;
    for (int a = 0; a < sino.num_angles(); ++a)
        detail::ramp_filter_row(&sino.values[static_cast<std::size_t>(a) * sino.num_bins()],
                                sino.num_bins(), sino.geometry.bin_width,
                                &filtered.values[static_cast<std::size_t>(a) * sino.num_bins()]);
    GridImage img = back_project(sm, filtered);
    for (double& v : img.values) v *= scale;
    return img;
}

struct ThresholdMethod {
    enum class Kind { otsu, fixed };
    Kind kind = Kind::otsu;
    double value = 0.0;

    static ThresholdMethod otsu() { return {Kind::otsu, 0.0}; }
    static ThresholdMethod fixed(double t) { return {Kind::fixed, t}; }
};

// Picks the 256-bin histogram threshold maximizing between-class variance
// (first maximum wins); returns the value so callers can report it.
inline double otsu_threshold(const GridImage& img) {
    const auto [mn_it, mx_it] = std::minmax_element(img.values.begin(), img.values.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mn == mx)
        throw DegenerateHistogram("constant image has no threshold");

    constexpr int kBins = 256;
    std::array<long, kBins> hist{};
    const double inv_width = kBins / (mx - mn);
    for (double v : img.values) {
        int b = static_cast<int>((v - mn) * inv_width);
        if (b < 0) b = 0;
        if (b >= kBins) b = kBins - 1;
        ++hist[static_cast<std::size_t>(b)];
    }

    const double total = static_cast<double>(img.values.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += static_cast<double>(b) * hist[static_cast<std::size_t>(b)];

    double best_var = -1.0;
    int best_k = 0;
    double w0 = 0.0, sum0 = 0.0;
    for (int k = 0; k < kBins - 1; ++k) {
        w0 += static_cast<double>(hist[static_cast<std::size_t>(k)]);
        sum0 += static_cast<double>(k) * hist[static_cast<std::size_t>(k)];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_k = k;
        }
    }
    // Upper edge of the winning bin, mapped back to intensity units.
    return mn + (static_cast<double>(best_k) + 1.0) * (mx - mn) / kBins;
}

inline BinaryImage threshold_segment(const GridImage& img,
                                     ThresholdMethod method = ThresholdMethod::otsu()) {
    const double t =
        method.kind == ThresholdMethod::Kind::otsu ? otsu_threshold(img) : method.value;
    BinaryImage mask(img.width, img.height);
    for (std::size_t p = 0; p < img.values.size(); ++p)
        mask.mask[p] = img.values[p] > t ? 1 : 0;
    return mask;
}

struct SegmentationMetrics {
    double dice = 0.0;
    double pixel_agreement = 0.0;
    BinaryImage diff_mask;
};

inline SegmentationMetrics compare_segmentations(const BinaryImage& a, const BinaryImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw DimensionError("mask dimensions differ");
    SegmentationMetrics m;
    m.diff_mask = BinaryImage(a.width, a.height);
    long inter = 0, total_a = 0, total_b = 0, agree = 0;
    for (std::size_t p = 0; p < a.mask.size(); ++p) {
        total_a += a.mask[p];
        total_b += b.mask[p];
        inter += a.mask[p] & b.mask[p];
        const bool same = a.mask[p] == b.mask[p];
        agree += same;
        m.diff_mask.mask[p] = same ? 0 : 1;
    }
    m.dice = (total_a + total_b == 0)
                 ? 1.0
                 : 2.0 * static_cast<double>(inter) / static_cast<double>(total_a + total_b);
    m.pixel_agreement = static_cast<double>(agree) / static_cast<double>(a.mask.size());
    return m;
}

} // namespace qtomo
