#pragma once

#include <stdexcept>
#include <vector>

#include "sirf/image.hpp"
#include "sirf/registration.hpp"
#include "sirf/resample.hpp"

namespace sirf {

struct SolverConfig {
  double lambda = 0.1;          // on 0-255 scaled inputs
  int max_outer = 300;
  double tol = 1e-3;            // relative iterate change
  int min_outer = 10;           // hard floor before any stop (keeps the
                                // registration window from being cut short)
  int inner_denoise_iters = 3;
  bool reg_enabled = false;
  int reg_first_k = 3;          // registration only in the first k iterations
  TransformKind reg_kind = TransformKind::Translation;
  RegistrationConfig reg;
  double step_constant = 1.0;   // L; the gradient step is 1/L
  bool warm_start_dual = true;
  bool prescale = true;         // rescale both inputs to 0-255 before solving
  bool verify_step = true;      // power-iteration check of the up/down operator
};

struct IterationStat {
  int k = 0;
  double objective = 0.0;
  double data_term = 0.0;
  double regularizer = 0.0;
  double rel_change = 0.0;
  TransformParams theta;
  double seconds = 0.0;
};

struct ConvergenceTrace {
  std::vector<IterationStat> iterations;
  bool converged = false;
  int outer_iterations = 0;
  double step_constant = 0.0;        // L actually used
  double operator_norm_estimate = 0.0;
};

struct FuseResult {
  MultiBandImage image;
  TransformParams transform;
  ConvergenceTrace trace;
  RegistrationTrace registration;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, ConvergenceTrace trace)
      : std::runtime_error(msg), trace(std::move(trace)) {}
  ConvergenceTrace trace;
};

// Joint pan-sharpening: accelerated proximal iteration on
//   0.5*||psi X - ms||_F^2 + lambda*||grad X - grad T(warped pan)||_2,1
// with the transform refreshed during the first reg_first_k iterations when
// registration is enabled.  The scale factor is derived from the image
// dimensions; equal dimensions mean psi is the identity.
FuseResult sirf_fuse(const MultiBandImage& ms, const MultiBandImage& pan,
                     const SolverConfig& cfg);

// Exact objective value at x for the given transform and unscaled inputs.
double sirf_objective(const MultiBandImage& x, const TransformParams& t,
                      const MultiBandImage& ms, const MultiBandImage& pan, double lambda);

}  // namespace sirf
