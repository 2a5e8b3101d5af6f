#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "qtomo/errors.hpp"

namespace qtomo {

// Dense 2-D real-valued pixel grid, row-major. Values carry X-ray mass
// attenuation (dimensionless in this library).
struct GridImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    GridImage() = default;

    GridImage(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w < 1 || h < 1)
            throw InvalidArgument("GridImage dimensions must be >= 1");
        values.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    double& at(int row, int col) {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * width + col];
    }

    std::size_t size() const { return values.size(); }

    double sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }

    bool same_dims(const GridImage& other) const {
        return width == other.width && height == other.height;
    }
};

// {0,1} mask, row-major.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;

    BinaryImage() = default;

    BinaryImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h) {
        if (w < 1 || h < 1)
            throw InvalidArgument("BinaryImage dimensions must be >= 1");
        mask.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    std::uint8_t& at(int row, int col) {
        return mask[static_cast<std::size_t>(row) * width + col];
    }
    std::uint8_t at(int row, int col) const {
        return mask[static_cast<std::size_t>(row) * width + col];
    }

    std::size_t size() const { return mask.size(); }

    // Number of set pixels.
    std::size_t count() const {
        std::size_t c = 0;
        for (auto v : mask) c += (v != 0);
        return c;
    }

    bool same_dims(const BinaryImage& other) const {
        return width == other.width && height == other.height;
    }
};

} // namespace qtomo
