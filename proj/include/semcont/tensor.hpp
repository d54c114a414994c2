#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "semcont/errors.hpp"

namespace semcont {

// Dense row-major float tensor. Deliberately minimal: the micro-CNN owns its
// loops, this type only carries shape + storage and the finiteness invariant.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, std::vector<float> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (element_count(shape) != data.size())
            throw numeric_error("tensor: shape/data size mismatch");
    }

    static std::size_t element_count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) {
        const std::size_t n = element_count(s);
        return Tensor(std::move(s), std::vector<float>(n, 0.0f));
    }

    std::size_t size() const { return data.size(); }

    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }

    // 3-D accessors (channel, row, col) for feature maps.
    float& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * shape[1] + y) * shape[2] + x];
    }
    float at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * shape[1] + y) * shape[2] + x];
    }

    bool all_finite() const {
        for (float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const std::string& what) const {
        if (!all_finite()) throw numeric_error("non-finite values in " + what);
    }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

}  // namespace semcont
