#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "semcont/errors.hpp"

namespace semcont {

// H x W grayscale raster, row-major, values in [0,1]. The unit of model input.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    Image() = default;
    Image(int w, int h, float fill_value = 0.0f)
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill_value) {}

    float& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    float at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return pixels.size(); }

    bool in_unit_range() const {
        for (float v : pixels)
            if (!(v >= 0.0f && v <= 1.0f)) return false;
        return true;
    }

    bool operator==(const Image& other) const {
        return width == other.width && height == other.height && pixels == other.pixels;
    }
};

// Mean squared pixel deviation between two equal-sized images (double math).
inline double image_msd(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw data_error("image_msd: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        acc += d * d;
    }
    return a.pixels.empty() ? 0.0 : acc / static_cast<double>(a.pixels.size());
}

}  // namespace semcont
