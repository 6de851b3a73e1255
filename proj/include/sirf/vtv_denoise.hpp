#pragma once

#include "sirf/image.hpp"
#include "sirf/tensor_ops.hpp"

namespace sirf {

// Dual state of the projection iteration.  Persisting it across calls warm
// starts the next solve (used by the outer loop between its iterations).
struct DenoiseState {
  DualPair rs;   // last projected dual point
  DualPair uv;   // extrapolated point the next iteration starts from
  double t = 1.0;
  int iterations_run = 0;
  bool initialized = false;
};

struct DenoiseResult {
  MultiBandImage x;
  DenoiseState state;
};

// Solves min_X 0.5*||X - y||_F^2 + lambda * ||grad X - grad reference||_2,1
// with `iters` accelerated dual projection steps.  Pass the state returned by
// a previous call as `warm` to continue from its duals; null starts cold.
DenoiseResult vtv_denoise(const MultiBandImage& y, const MultiBandImage& reference,
                          double lambda, int iters, const DenoiseState* warm = nullptr);

// Exact objective value of the problem above at x.
double vtv_objective(const MultiBandImage& x, const MultiBandImage& y,
                     const MultiBandImage& reference, double lambda);

}  // namespace sirf
