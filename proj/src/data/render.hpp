#pragma once

#include "math/tensor.hpp"

namespace abdgen::data {

struct Tint {
    double r = 0.2, g = 0.2, b = 0.2;
};

// 3x27x27. Mario occupies one 9x9 cell of a 3x3 grid (row-major cell index,
// row 0 on top); the background carries a per-case tint.
math::Tensor render_mario(std::size_t cell, const Tint& tint);

// 1x32x32 binary image: a centered filled glyph (shape 0 square, 1 disc,
// 2 triangle) at one of three sizes, plus a 4x4 corner marker encoding the
// orientation quadrant. Rotationally symmetric glyphs stay distinguishable
// through the marker.
math::Tensor render_shape(std::size_t shape, std::size_t scale, std::size_t orient);

// 3x27x27 glyph: age = number of concentric rings (1..3), gender = filled
// (1) vs hollow (0) center block; tinted background.
math::Tensor render_attrib(std::size_t age, std::size_t gender, const Tint& tint);

}  // namespace abdgen::data
