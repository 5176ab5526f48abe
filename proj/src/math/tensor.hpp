#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace abdgen::math {

// Dense row-major tensor of doubles. Rank is dynamic; shapes are small
// (images, weight matrices), so no striding tricks.
struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> d, double fill = 0.0);

    static Tensor scalar(double v);
    static Tensor vec(std::initializer_list<double> vals);

    std::size_t numel() const { return data.size(); }
    std::size_t rank() const { return dims.size(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    double& at2(std::size_t r, std::size_t c) { return data[r * dims[1] + c]; }
    double at2(std::size_t r, std::size_t c) const { return data[r * dims[1] + c]; }
    double& at3(std::size_t a, std::size_t b, std::size_t c) {
        return data[(a * dims[1] + b) * dims[2] + c];
    }
    double at3(std::size_t a, std::size_t b, std::size_t c) const {
        return data[(a * dims[1] + b) * dims[2] + c];
    }
    double& at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return data[((a * dims[1] + b) * dims[2] + c) * dims[3] + d];
    }
    double at4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        return data[((a * dims[1] + b) * dims[2] + c) * dims[3] + d];
    }

    bool same_shape(const Tensor& o) const { return dims == o.dims; }
    bool all_finite() const;
    std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<std::size_t>& dims);

}  // namespace abdgen::math
