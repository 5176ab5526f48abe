#pragma once

#include <cmath>
#include <map>
#include <string>

#include "nn/model.hpp"

namespace testutil {

// Componentwise finite-difference verification of the training losses.
//
// The combined objective contains two estimators that are deliberately not
// the gradient of the forward value: the straight-through lookup (decoder
// gradients copied to z_sym, none to the codebook) and the gradient-reversal
// layer (encoder receives -alpha times the adversarial gradient). Each loss
// component is therefore checked on the blocks where its analytic gradient is
// the true derivative, and the reversal is checked against its defining
// factor of -alpha.
struct GradCheckReport {
    double max_err = 0.0;
    std::string worst;
    int checked = 0;
};

inline void fd_check_component(abdgen::nn::Model& model, abdgen::math::ParamStore& ps,
                               const std::vector<abdgen::nn::BatchItem>& batch,
                               const std::function<bool(const std::string&)>& block_filter,
                               double factor, GradCheckReport& report, double eps = 1e-4) {
    using abdgen::Rng;
    using abdgen::math::Tensor;
    std::map<std::string, Tensor> grads;
    Rng g0(99);
    model.gradients(batch, g0, grads);
    for (auto& [name, grad] : grads) {
        if (!block_filter(name)) continue;
        Tensor& t = ps.get(name);
        for (std::size_t idx : {std::size_t{0}, t.numel() / 2, t.numel() - 1}) {
            double keep = t[idx];
            t[idx] = keep + eps;
            Rng f1(99);
            double up = model.losses(batch, f1).total;
            t[idx] = keep - eps;
            Rng f2(99);
            double down = model.losses(batch, f2).total;
            t[idx] = keep;
            double fd = factor * (up - down) / (2 * eps);
            double ad = grad[idx];
            double err = std::abs(ad - fd) / std::max(1.0, std::abs(ad) + std::abs(fd));
            if (err > report.max_err) {
                report.max_err = err;
                report.worst = name + "[" + std::to_string(idx) + "]";
            }
            ++report.checked;
        }
    }
}

// Runs all four components for one seed over the given config factory.
// Returns the worst relative error across every checked coordinate.
template <typename MakeConfig, typename MakeImage>
GradCheckReport check_loss_gradients(std::uint64_t seed, MakeConfig make_config,
                                     MakeImage make_image) {
    using namespace abdgen;
    using nn::BatchItem;
    using nn::Model;
    GradCheckReport report;

    auto starts_with = [](const std::string& name, const char* prefix) {
        return name.rfind(prefix, 0) == 0;
    };

    struct Component {
        nn::LossWeights weights;
        std::function<bool(const std::string&)> filter;
        double factor;
    };
    const double alpha = 0.7;
    std::vector<Component> components;
    // grounding CE: differentiable in the encoder, symbol heads, and codebook
    components.push_back({{1, 0, 0, 0}, [&](const std::string&) { return true; }, 1.0});
    // reconstruction: exact through the decoder and the z_sub path; the
    // straight-through copy into enc.sym/conv/codebook is excluded by design
    components.push_back({{0, 1, 0, 0},
                          [=](const std::string& n) {
                              return starts_with(n, "dec.") || starts_with(n, "enc.sub.");
                          },
                          1.0});
    // adversarial CE: exact on the classifier itself
    components.push_back(
        {{0, 0, 1, 0}, [=](const std::string& n) { return starts_with(n, "adv."); }, 1.0});
    // adversarial CE through the reversal layer: encoder receives -alpha
    // times the true gradient
    components.push_back({{0, 0, 1, 0},
                          [=](const std::string& n) {
                              return starts_with(n, "enc.sub.") || starts_with(n, "enc.conv");
                          },
                          -alpha});
    // generator GAN term: exact through decoder and the z_sub path
    components.push_back({{0, 0, 0, 1},
                          [=](const std::string& n) {
                              return starts_with(n, "dec.") || starts_with(n, "enc.");
                          },
                          1.0});

    for (const Component& comp : components) {
        math::ParamStore ps;
        Rng rng(seed);
        nn::ModelConfig cfg = make_config();
        cfg.alpha = alpha;
        cfg.weights = comp.weights;
        Model model(cfg, ps, rng);
        Rng ri(seed + 100);
        math::Tensor x = make_image(cfg, ri);
        std::vector<BatchItem> batch{{&x, std::vector<std::size_t>{1}}};
        fd_check_component(model, ps, batch, comp.filter, comp.factor, report);
    }
    return report;
}

}  // namespace testutil
