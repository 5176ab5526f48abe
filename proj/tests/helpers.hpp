#pragma once

#include <functional>
#include <string>

#include "math/graph.hpp"
#include "math/params.hpp"

namespace testutil {

// Central finite-difference check of every parameter block touched by the
// graph that `build` constructs. Returns the worst relative error; rel err is
// |ad - fd| / max(1, |ad| + |fd|).
inline double grad_check_max_err(
    abdgen::math::ParamStore& ps,
    const std::function<abdgen::math::Graph::Id(abdgen::math::Graph&, abdgen::math::ParamStore&)>&
        build,
    double eps = 1e-4, std::string* worst = nullptr) {
    using namespace abdgen::math;
    Graph g;
    Graph::Id loss = build(g, ps);
    g.backward(loss);
    std::map<std::string, Tensor> analytic;
    g.visit_param_grads([&](const std::string& name, const Tensor& grad) {
        auto [it, fresh] = analytic.emplace(name, grad);
        if (!fresh)
            for (std::size_t i = 0; i < grad.numel(); ++i) it->second[i] += grad[i];
    });

    auto eval = [&]() {
        Graph fg;
        Graph::Id l = build(fg, ps);
        return fg.value(l)[0];
    };

    double max_err = 0.0;
    for (auto& [name, grad] : analytic) {
        Tensor& p = ps.get(name);
        for (std::size_t i = 0; i < p.numel(); ++i) {
            double keep = p[i];
            p[i] = keep + eps;
            double up = eval();
            p[i] = keep - eps;
            double down = eval();
            p[i] = keep;
            double fd = (up - down) / (2.0 * eps);
            double ad = grad[i];
            double err = std::abs(ad - fd) / std::max(1.0, std::abs(ad) + std::abs(fd));
            if (err > max_err) {
                max_err = err;
                if (worst) *worst = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return max_err;
}

}  // namespace testutil
