#pragma once

#include "data/worlds.hpp"
#include "nn/model.hpp"

namespace abdgen::orch {

struct GenerateResult {
    std::vector<math::Tensor> images;
    std::vector<std::vector<std::size_t>> values;  // logic-inferred symbol values per step
    std::vector<std::size_t> context_values;
};

// Encodes the context image, forward-chains symbol values under the rules,
// and decodes each step with the context's sub-symbolic embedding. `rules`
// may be a background program with %% rule groups (verification-driven
// chaining) or an induced hypothesis in induction form (entailment-driven).
// Output stops at `steps` images or at the world's terminal state. Throws
// LogicStuck when no rule-consistent continuation exists at the first step.
GenerateResult generate(const math::Tensor& context, const logic::Program& rules,
                        const nn::Model& model, std::size_t steps, data::WorldKind kind);

}  // namespace abdgen::orch
