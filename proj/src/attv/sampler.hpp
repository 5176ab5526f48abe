#pragma once

#include <vector>

#include "logic/verify.hpp"
#include "math/graph.hpp"
#include "math/params.hpp"
#include "rng.hpp"
#include "vq/codebook.hpp"
#include "vq/schema.hpp"

namespace abdgen::attv {

struct SamplerConfig {
    vq::SymbolSchema schema;
    std::size_t max_case_len = 6;  // positional one-hot length
    std::size_t rule_count = 1;    // background rule groups (one embedding pair each)
    std::size_t att_dim = 32;      // single head, shared key/query/value width
};

// Per (image, symbol) sampling probabilities over the symbol's values.
using SamplingDistribution = std::vector<std::vector<std::vector<double>>>;

// pool_size candidates: the argmax assignment first, then independent
// per-slot draws, deduplicated in draw order.
std::vector<vq::GroundingAssignment> sample_pool(const SamplingDistribution& dist,
                                                 std::size_t pool_size, Rng& rng);

// Attention-based verification sampler: self-attention over per-image
// candidate-grounding embeddings, cross-attention against per-rule
// consistent/violated embeddings selected by the verification report, then a
// per-symbol projection whose output is grounded through the codebook's
// distance softmax.
class Sampler {
public:
    Sampler(SamplerConfig cfg, math::ParamStore& ps, Rng& rng);

    const SamplerConfig& config() const { return cfg_; }

    SamplingDistribution propose(const vq::GroundingAssignment& current,
                                 const logic::VerificationReport& report,
                                 const std::vector<const math::Tensor*>& codebooks) const;

    std::vector<vq::GroundingAssignment> sample_pool(const SamplingDistribution& dist,
                                                     std::size_t pool_size, Rng& rng) const {
        return attv::sample_pool(dist, pool_size, rng);
    }

    // One cross-entropy gradient step on the masked slots; an empty mask
    // leaves the parameters and optimizer state untouched.
    void update(const vq::GroundingAssignment& current, const logic::VerificationReport& report,
                const std::vector<const math::Tensor*>& codebooks,
                const vq::GroundingAssignment& targets,
                const std::vector<std::vector<bool>>& mask, double lr, double momentum);

    // Forward graph shared by propose/update; exposed for gradient checks.
    std::vector<math::Graph::Id> build(math::Graph& g, bool trainable,
                                       const vq::GroundingAssignment& current,
                                       const logic::VerificationReport& report,
                                       const std::vector<const math::Tensor*>& codebooks) const;

private:
    SamplerConfig cfg_;
    math::ParamStore* ps_;
};

}  // namespace abdgen::attv
