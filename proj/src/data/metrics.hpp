#pragma once

#include "math/tensor.hpp"
#include "vq/schema.hpp"

namespace abdgen::data {

// Maximum per-tile mean squared error over a piece x piece spatial tiling.
// Throws ShapeMismatch / IndivisiblePiece.
double clipped_mse(const math::Tensor& a, const math::Tensor& b, std::size_t piece);

// Fraction of (image, symbol) slots where pred equals truth. Throws
// SchemaMismatch when the slot sets differ.
double grounding_accuracy(const vq::GroundingAssignment& pred,
                          const vq::GroundingAssignment& truth);

struct RuleProportions {
    double correct = 0.0;
    double less_informative = 0.0;
    double wrong = 0.0;
};

}  // namespace abdgen::data
