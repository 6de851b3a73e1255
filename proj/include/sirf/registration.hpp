#pragma once

#include <vector>

#include "sirf/image.hpp"
#include "sirf/resample.hpp"

namespace sirf {

struct RegistrationConfig {
  double epsilon = 1e-10;    // smoothing inside the per-pixel square root
  double initial_step = 1.0; // reset at the start of every pyramid level
  double eta = 0.8;          // backtracking shrink factor
  int inner_iters = 3;       // accepted steps per pyramid level
  int pyramid_levels = 0;    // 0 selects automatically
  int max_backtracks = 30;
};

struct DgsEnergy {
  double energy = 0.0;
  long overlap = 0;
  double normalized() const;
};

// Smoothed group-sparsity energy between grad X and the gradient of the
// warped pan, summed over the overlap.  Difference terms whose stencil
// leaves the overlap contribute zero on both sides.
DgsEnergy dgs_energy(const MultiBandImage& x, const MultiBandImage& pan,
                     const TransformParams& t, double epsilon);

// Analytic gradient of the normalized energy E/M with respect to the
// transform parameters (2 for translation, 6 for affine).  The derivative is
// taken exactly through the bilinear warp interpolant.
std::vector<double> dgs_gradient(const MultiBandImage& x, const MultiBandImage& pan,
                                 const TransformParams& t, double epsilon);

struct RegistrationStep {
  TransformParams theta;  // expressed at the finest level
  double normalized_energy;
  double step;
  long overlap;
  int level;
};

struct RegistrationTrace {
  std::vector<RegistrationStep> steps;
};

struct RegistrationResult {
  TransformParams theta;
  RegistrationTrace trace;
};

int auto_pyramid_levels(int rows, int cols);

// Coarse-to-fine backtracking descent on the normalized energy, starting
// from init.  Accepted steps never increase the per-level normalized energy.
RegistrationResult register_images(const MultiBandImage& x, const MultiBandImage& pan,
                                   const TransformParams& init,
                                   const RegistrationConfig& cfg);

}  // namespace sirf
