#pragma once

#include <string>
#include <vector>

#include "math/tensor.hpp"
#include "rng.hpp"
#include "vq/schema.hpp"

namespace abdgen::vq {

// Grounding of one embedding against one symbol's codebook.
struct SymbolGrounding {
    std::size_t value = 0;            // argmax of probs, ties to the lowest index
    std::vector<double> probs;        // distance softmax, sums to 1
};

// Grounding of a full per-symbol embedding set.
struct GroundingResult {
    std::vector<std::size_t> values;
    std::vector<math::Tensor> embeddings;  // codebook rows at the argmax values
    std::vector<std::vector<double>> probs;
};

struct SlotRef {
    std::string case_id;
    std::size_t image_index = 0;
    std::size_t symbol = 0;

    bool operator==(const SlotRef& o) const {
        return case_id == o.case_id && image_index == o.image_index && symbol == o.symbol;
    }
};

// Ties a negative-case slot's grounding to a positive slot's grounding.
struct BindingConstraint {
    SlotRef negative_slot;
    SlotRef bound_to;
};

// P(Y) = exp(-||z - z_Y||) / sum_Y' exp(-||z - z_Y'||), argmax with ties to the
// lowest value index. Throws DimensionMismatch.
SymbolGrounding ground_one(const math::Tensor& z, const math::Tensor& codebook);

// Convenience over all symbols; codebooks[s] is the [cardinality_s, embed_dim]
// matrix for symbol s.
GroundingResult ground(const std::vector<math::Tensor>& z_per_symbol,
                       const std::vector<const math::Tensor*>& codebooks);

// Fetches the codebook row for a value. Throws ValueOutOfRange.
math::Tensor retrieve_one(std::size_t value, const math::Tensor& codebook);
std::vector<math::Tensor> retrieve(const std::vector<std::size_t>& values,
                                   const std::vector<const math::Tensor*>& codebooks);

// Nearest positive slot by Euclidean distance, ties to the lowest index.
// Throws EmptyPositives.
BindingConstraint bind_negative(const SlotRef& negative_slot, const math::Tensor& z,
                                const std::vector<std::pair<SlotRef, math::Tensor>>& positives);

// Rows drawn uniformly from [-0.5, 0.5]^embed_dim; any row closer than 0.1 to
// an earlier row is re-drawn.
math::Tensor init_codebook(std::size_t cardinality, std::size_t embed_dim, Rng& rng);

// Parameter-store block name for one symbol's codebook.
std::string codebook_block(const std::string& symbol_name);

}  // namespace abdgen::vq
