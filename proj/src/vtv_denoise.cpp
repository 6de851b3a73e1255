#include "sirf/vtv_denoise.hpp"

#include <cmath>
#include <stdexcept>

namespace sirf {

DenoiseResult vtv_denoise(const MultiBandImage& y, const MultiBandImage& reference,
                          double lambda, int iters, const DenoiseState* warm) {
  ensure_valid(y, "vtv_denoise");
  ensure_valid(reference, "vtv_denoise reference");
  if (!y.same_shape(reference))
    throw std::invalid_argument("vtv_denoise: input " + y.shape_string() +
                                " vs reference " + reference.shape_string());
  if (!(lambda > 0.0)) throw std::invalid_argument("vtv_denoise: lambda must be > 0");
  if (iters < 1) throw std::invalid_argument("vtv_denoise: iters must be >= 1");

  const int m = y.rows, n = y.cols, s = y.bands;
  MultiBandImage b(m, n, s);
  for (std::size_t k = 0; k < b.data.size(); ++k) b.data[k] = y.data[k] - reference.data[k];

  DenoiseState st;
  if (warm && warm->initialized) {
    if (!warm->rs.r.same_shape(y))
      throw std::invalid_argument("vtv_denoise: warm state shape " +
                                  warm->rs.r.shape_string() + " does not match input " +
                                  y.shape_string());
    st = *warm;
  } else {
    st.rs = DualPair{MultiBandImage(m, n, s), MultiBandImage(m, n, s)};
    st.uv = st.rs;
    st.t = 1.0;
    st.iterations_run = 0;
    st.initialized = true;
  }

  const double step = 1.0 / (8.0 * lambda);
  for (int k = 0; k < iters; ++k) {
    // g = b - lambda * L(uv), then candidate duals uv + step * L^T(g).
    MultiBandImage g = l_op(st.uv);
    for (std::size_t q = 0; q < g.data.size(); ++q) g.data[q] = b.data[q] - lambda * g.data[q];
    DualPair lt = l_adjoint(g);
    DualPair cand{MultiBandImage(m, n, s), MultiBandImage(m, n, s)};
    for (std::size_t q = 0; q < cand.r.data.size(); ++q) {
      cand.r.data[q] = st.uv.r.data[q] + step * lt.r.data[q];
      cand.s.data[q] = st.uv.s.data[q] + step * lt.s.data[q];
    }
    DualPair next = project_dual(std::move(cand));

    double t_next = (1.0 + std::sqrt(1.0 + 4.0 * st.t * st.t)) / 2.0;
    double gamma = (st.t - 1.0) / t_next;
    for (std::size_t q = 0; q < next.r.data.size(); ++q) {
      st.uv.r.data[q] = next.r.data[q] + gamma * (next.r.data[q] - st.rs.r.data[q]);
      st.uv.s.data[q] = next.s.data[q] + gamma * (next.s.data[q] - st.rs.s.data[q]);
    }
    st.rs = std::move(next);
    st.t = t_next;
    ++st.iterations_run;
  }

  MultiBandImage x = l_op(st.rs);
  for (std::size_t q = 0; q < x.data.size(); ++q)
    x.data[q] = b.data[q] - lambda * x.data[q] + reference.data[q];
  return DenoiseResult{std::move(x), std::move(st)};
}

double vtv_objective(const MultiBandImage& x, const MultiBandImage& y,
                     const MultiBandImage& reference, double lambda) {
  if (!x.same_shape(y) || !x.same_shape(reference))
    throw std::invalid_argument("vtv_objective: mismatched shapes");
  double fid = 0.0;
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    double d = x.data[k] - y.data[k];
    fid += d * d;
  }
  return 0.5 * fid + lambda * group_l21_gradient_residual(x, reference);
}

}  // namespace sirf
