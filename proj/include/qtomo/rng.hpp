#pragma once

#include <cmath>
#include <cstdint>

namespace qtomo {

// SplitMix64 (Steele, Lea & Flood, "Fast splittable pseudorandom number
// generators", OOPSLA 2014). The project-wide generator: the whole algorithm
// is three xor-shift-multiply lines, so a reimplementation in any language
// reproduces our streams bit for bit. std::random distributions are avoided
// for the same reason; derived draws below are fully specified.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double next_double_open() noexcept {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    bool next_bit() noexcept { return (next() >> 63) != 0; }

    // Uniform in {0, ..., n-1} by rejection-free scaling; n must be > 0.
    // Bias is < n / 2^53, negligible for the index ranges used here.
    std::uint64_t next_below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    }

    // Standard normal via Box-Muller; the second value of each pair is
    // cached so consecutive calls consume exactly two uniforms per pair.
    double next_gaussian() noexcept {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_double_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace qtomo
