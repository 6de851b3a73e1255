#pragma once

#include "sirf/image.hpp"

namespace sirf {

// Forward differences with zero beyond the last row/column.
GradientField forward_gradient(const MultiBandImage& x);

// Adjoint pair used by the dual denoising iteration.  l_adjoint is the
// negated forward gradient; l_op is its exact adjoint, which means the last
// row of r and the last column of s are structurally unused and treated as
// zero.  <l_op(d), x> == <d.r, l_adjoint(x).r> + <d.s, l_adjoint(x).s>
// holds exactly for arbitrary inputs.
MultiBandImage l_op(const DualPair& d);
DualPair l_adjoint(const MultiBandImage& x);

// Projection onto the dual constraint set: per-pixel groups across bands and
// both directions are scaled into the unit ball; the boundary strips (last
// column of r, last row of s) are scalar-clamped to [-1, 1]; the structurally
// unused entries are zeroed.
DualPair project_dual(DualPair d);

// Sum over pixels of the Euclidean norm of the per-pixel gradient group
// (all bands, both directions).
double group_l21_norm(const GradientField& g);

// Residual form used by the objectives: per-pixel group norm of
// forward_gradient(x) - forward_gradient(ref).
double group_l21_gradient_residual(const MultiBandImage& x, const MultiBandImage& ref);

// Copies a single-band image into `bands` identical planes.
MultiBandImage replicate_pan(const MultiBandImage& pan, int bands);

}  // namespace sirf
