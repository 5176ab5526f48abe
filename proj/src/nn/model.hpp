#pragma once

#include <optional>
#include <string>
#include <vector>

#include "math/graph.hpp"
#include "math/params.hpp"
#include "rng.hpp"
#include "vq/codebook.hpp"
#include "vq/schema.hpp"

namespace abdgen::nn {

struct LossWeights {
    double grounding = 1.0;
    double reconstruction = 1.0;
    double adv = 0.1;
    double gan = 0.1;
};

struct ModelConfig {
    std::size_t img_c = 3, img_h = 27, img_w = 27;
    vq::SymbolSchema schema;
    std::size_t z_sub_dim = 16;
    std::size_t conv1_c = 8, conv2_c = 16;
    std::size_t kernel = 3, stride = 2, pad = 1;
    std::size_t adv_hidden = 32;
    std::size_t disc_hidden = 64;
    bool binary_images = false;  // per-pixel logistic reconstruction loss
    double alpha = 1.0;          // gradient-reversal strength
    LossWeights weights;

    std::size_t h1() const { return (img_h + 2 * pad - kernel) / stride + 1; }
    std::size_t w1() const { return (img_w + 2 * pad - kernel) / stride + 1; }
    std::size_t h2() const { return (h1() + 2 * pad - kernel) / stride + 1; }
    std::size_t w2() const { return (w1() + 2 * pad - kernel) / stride + 1; }
    std::size_t flat_dim() const { return conv2_c * h2() * w2(); }
    std::size_t dec_in_dim() const {
        return schema.count() * schema.embed_dim + z_sub_dim;
    }
    std::size_t onehot_dim() const {
        std::size_t n = 0;
        for (const auto& s : schema.symbols) n += s.cardinality;
        return n;
    }
};

struct LossReport {
    double grounding_ce = 0.0;
    double reconstruction = 0.0;
    double adv = 0.0;
    double gan = 0.0;
    double total = 0.0;
};

// One training item: an image plus, when available, target symbol values
// (ground truth or abduced). Items without targets contribute only the
// reconstruction and generator-GAN terms.
struct BatchItem {
    const math::Tensor* image = nullptr;
    std::optional<std::vector<std::size_t>> targets;
};

// Encoders, decoder, adversarial classifier, conditional discriminator, and
// the per-symbol codebooks, all stored as named blocks in a shared ParamStore.
class Model {
public:
    Model(ModelConfig cfg, math::ParamStore& ps, Rng& rng);

    const ModelConfig& config() const { return cfg_; }
    math::ParamStore& params() { return *ps_; }
    const math::ParamStore& params() const { return *ps_; }

    const math::Tensor& codebook(std::size_t symbol) const;
    std::vector<const math::Tensor*> codebooks() const;

    struct Encoded {
        std::vector<math::Tensor> z_sym;  // one per symbol
        math::Tensor z_sub;
    };
    Encoded encode(const math::Tensor& x) const;
    vq::GroundingResult ground(const Encoded& e) const;
    std::vector<std::size_t> predict_values(const math::Tensor& x) const;

    // z_l: one embedding per symbol. Output in [0,1] via the final sigmoid.
    math::Tensor decode(const std::vector<math::Tensor>& z_l, const math::Tensor& z_sub) const;

    // Forward losses without an update.
    LossReport losses(const std::vector<BatchItem>& batch, Rng& rng) const;

    // Losses plus the analytic gradients of the combined generator objective
    // (grounding + reconstruction + adversarial + GAN) for every
    // non-discriminator block.
    LossReport gradients(const std::vector<BatchItem>& batch, Rng& rng,
                         std::map<std::string, math::Tensor>& out) const;

    // One momentum-SGD step of generator, codebooks, and adversarial
    // classifier, followed by the discriminator's own step.
    LossReport train_step(const std::vector<BatchItem>& batch, double lr, double momentum,
                          Rng& rng);

    // Graph builders shared by training and forward evaluation.
    struct GraphRefs {
        std::vector<math::Graph::Id> z_sym;
        math::Graph::Id z_sub = -1;
        std::vector<math::Graph::Id> probs;       // per symbol, [1,K]
        std::vector<std::size_t> pred_values;     // argmax per symbol
        math::Graph::Id recon_logits = -1;        // pre-sigmoid decoder output
        math::Graph::Id recon = -1;               // sigmoid output
    };

private:
    struct Binder {
        math::Graph& g;
        math::ParamStore& ps;
        bool trainable;
        std::map<std::string, math::Graph::Id> cache;
        math::Graph::Id operator()(const std::string& name);
    };

    GraphRefs build_forward(math::Graph& g, Binder& bind, const math::Tensor& x) const;
    std::pair<math::Graph::Id, math::Graph::Id> build_decoder(
        math::Graph& g, Binder& bind, math::Graph::Id d_in) const;  // (logits, sigmoid)
    math::Graph::Id build_disc(math::Graph& g, Binder& bind, math::Graph::Id image,
                               const std::vector<std::size_t>& values) const;
    LossReport run_batch(const std::vector<BatchItem>& batch, Rng& rng, bool update, double lr,
                         double momentum, std::map<std::string, math::Tensor>* grads_out);

    math::Tensor onehot(const std::vector<std::size_t>& values) const;

    ModelConfig cfg_;
    math::ParamStore* ps_;
};

}  // namespace abdgen::nn
