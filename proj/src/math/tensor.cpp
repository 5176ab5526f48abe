#include "math/tensor.hpp"

#include <sstream>

namespace abdgen::math {

std::size_t shape_numel(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> d, double fill)
    : dims(std::move(d)), data(shape_numel(dims), fill) {}

Tensor Tensor::scalar(double v) {
    Tensor t{{1}};
    t.data[0] = v;
    return t;
}

Tensor Tensor::vec(std::initializer_list<double> vals) {
    Tensor t{{vals.size()}};
    std::size_t i = 0;
    for (double v : vals) t.data[i++] = v;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << 'x';
        os << dims[i];
    }
    os << ']';
    return os.str();
}

}  // namespace abdgen::math
