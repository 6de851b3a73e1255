#include "sirf/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "sirf/tensor_ops.hpp"
#include "sirf/vtv_denoise.hpp"

namespace sirf {

namespace {

int derive_scale(const MultiBandImage& ms, const MultiBandImage& pan, const char* what) {
  if (pan.rows % ms.rows != 0 || pan.cols % ms.cols != 0)
    throw std::invalid_argument(std::string(what) + ": pan " + pan.shape_string() +
                                " is not an integer multiple of ms " + ms.shape_string());
  int c = pan.rows / ms.rows;
  if (c < 1 || pan.cols / ms.cols != c)
    throw std::invalid_argument(std::string(what) + ": inconsistent scale between pan " +
                                pan.shape_string() + " and ms " + ms.shape_string());
  return c;
}

struct Rescale {
  double offset = 0.0;
  double scale = 1.0;  // scaled = (v - offset) * scale
};

Rescale fit_rescale(const MultiBandImage& img) {
  double lo = img.data[0], hi = img.data[0];
  for (double v : img.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi > lo) return {lo, 255.0 / (hi - lo)};
  return {0.0, 1.0};
}

MultiBandImage apply_rescale(const MultiBandImage& img, const Rescale& r) {
  MultiBandImage out = img;
  for (double& v : out.data) v = (v - r.offset) * r.scale;
  return out;
}

// The fusion reference samples the pan with clamped coordinates instead of
// warp()'s zero fill: a zero strip outside the overlap would read as a strong
// false edge and the regularizer would stamp it into X.
MultiBandImage warped_reference(const MultiBandImage& pan, const TransformParams& t, int bands) {
  bool ident = true;
  TransformParams id = TransformParams::identity(t.kind);
  for (int k = 0; k < t.dof(); ++k) ident = ident && t.theta[k] == id.theta[k];
  if (ident) return replicate_pan(pan, bands);
  MultiBandImage moved(pan.rows, pan.cols, 1);
  for (int i = 0; i < pan.rows; ++i) {
    for (int j = 0; j < pan.cols; ++j) {
      double xs, ys;
      t.map(static_cast<double>(j), static_cast<double>(i), xs, ys);
      xs = std::clamp(xs, 0.0, static_cast<double>(pan.cols - 1));
      ys = std::clamp(ys, 0.0, static_cast<double>(pan.rows - 1));
      moved.at(i, j, 0) = bilinear_at(pan, xs, ys, 0);
    }
  }
  return replicate_pan(moved, bands);
}

}  // namespace

double sirf_objective(const MultiBandImage& x, const TransformParams& t,
                      const MultiBandImage& ms, const MultiBandImage& pan, double lambda) {
  ensure_valid(x, "sirf_objective");
  int c = derive_scale(ms, pan, "sirf_objective");
  if (x.rows != pan.rows || x.cols != pan.cols || x.bands != ms.bands)
    throw std::invalid_argument("sirf_objective: x " + x.shape_string() +
                                " does not match pan/ms geometry");
  MultiBandImage down = c > 1 ? downsample(x, c) : x;
  double fid = 0.0;
  for (std::size_t k = 0; k < down.data.size(); ++k) {
    double d = down.data[k] - ms.data[k];
    fid += d * d;
  }
  MultiBandImage ref = warped_reference(pan, t, x.bands);
  return 0.5 * fid + lambda * group_l21_gradient_residual(x, ref);
}

FuseResult sirf_fuse(const MultiBandImage& ms, const MultiBandImage& pan,
                     const SolverConfig& cfg) {
  ensure_valid(ms, "sirf_fuse ms");
  ensure_valid(pan, "sirf_fuse pan");
  if (pan.bands != 1)
    throw std::invalid_argument("sirf_fuse: pan must be single-band, got " + pan.shape_string());
  int c = derive_scale(ms, pan, "sirf_fuse");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("sirf_fuse: lambda must be > 0");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("sirf_fuse: tol must be > 0");
  if (cfg.max_outer < 1) throw std::invalid_argument("sirf_fuse: max_outer must be >= 1");
  if (cfg.min_outer < 1) throw std::invalid_argument("sirf_fuse: min_outer must be >= 1");
  if (cfg.inner_denoise_iters < 1)
    throw std::invalid_argument("sirf_fuse: inner_denoise_iters must be >= 1");
  if (!(cfg.step_constant > 0.0))
    throw std::invalid_argument("sirf_fuse: step_constant must be > 0");

  Rescale rm{0.0, 1.0}, rp{0.0, 1.0};
  if (cfg.prescale) {
    rm = fit_rescale(ms);
    rp = fit_rescale(pan);
  }
  MultiBandImage m_in = apply_rescale(ms, rm);
  MultiBandImage p_in = apply_rescale(pan, rp);
  const int s = ms.bands;

  FuseResult out;
  out.trace.step_constant = cfg.step_constant;
  double lip = cfg.step_constant;
  if (cfg.verify_step && c > 1) {
    out.trace.operator_norm_estimate = estimate_updown_norm(pan.rows, pan.cols, c);
    if (out.trace.operator_norm_estimate > 1.0 + 1e-3) lip *= 2.0;
    out.trace.step_constant = lip;
  }

  TransformParams theta = TransformParams::identity(cfg.reg_kind);
  MultiBandImage y = c > 1 ? upsample(m_in, c) : m_in;
  MultiBandImage x_prev = y;
  MultiBandImage ref = warped_reference(p_in, theta, s);
  DenoiseState dual_state;
  double t = 1.0;
  MultiBandImage x;
  // The truncated inner prox ramps its duals up over the first outer
  // iterations, so the relative change dips, climbs while the momentum
  // builds, and only then decays.  Stopping requires two consecutive
  // non-increasing values under tol, which skips the warmup dip.
  double rel_prev = std::numeric_limits<double>::infinity();

  for (int k = 1; k <= cfg.max_outer; ++k) {
    auto tick = std::chrono::steady_clock::now();

    // Gradient step on the data term at the extrapolated point.
    MultiBandImage grad_pt = y;
    {
      MultiBandImage resid = c > 1 ? downsample(y, c) : y;
      for (std::size_t q = 0; q < resid.data.size(); ++q) resid.data[q] -= m_in.data[q];
      MultiBandImage back = c > 1 ? upsample(resid, c) : std::move(resid);
      double inv_l = 1.0 / lip;
      for (std::size_t q = 0; q < grad_pt.data.size(); ++q)
        grad_pt.data[q] -= inv_l * back.data[q];
    }

    DenoiseResult den = vtv_denoise(grad_pt, ref, cfg.lambda / lip, cfg.inner_denoise_iters,
                                    cfg.warm_start_dual ? &dual_state : nullptr);
    x = std::move(den.x);
    if (cfg.warm_start_dual) dual_state = std::move(den.state);

    if (cfg.reg_enabled && k <= cfg.reg_first_k) {
      RegistrationResult reg = register_images(x, p_in, theta, cfg.reg);
      theta = reg.theta;
      for (auto& st : reg.trace.steps) out.registration.steps.push_back(st);
      ref = warped_reference(p_in, theta, s);
    }

    IterationStat stat;
    stat.k = k;
    {
      MultiBandImage down = c > 1 ? downsample(x, c) : x;
      double fid = 0.0;
      for (std::size_t q = 0; q < down.data.size(); ++q) {
        double d = down.data[q] - m_in.data[q];
        fid += d * d;
      }
      stat.data_term = 0.5 * fid;
    }
    stat.regularizer = cfg.lambda * group_l21_gradient_residual(x, ref);
    stat.objective = stat.data_term + stat.regularizer;
    stat.theta = theta;

    double denom = norm_fro(x_prev);
    double diff = 0.0;
    for (std::size_t q = 0; q < x.data.size(); ++q) {
      double d = x.data[q] - x_prev.data[q];
      diff += d * d;
    }
    stat.rel_change = std::sqrt(diff) / std::max(denom, 1e-300);
    stat.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
    out.trace.iterations.push_back(stat);
    out.trace.outer_iterations = k;

    if (!std::isfinite(stat.objective))
      throw SolverError("sirf_fuse: non-finite objective at iteration " + std::to_string(k),
                        out.trace);

    if (k >= cfg.min_outer && stat.rel_change <= cfg.tol && rel_prev <= cfg.tol &&
        stat.rel_change <= rel_prev) {
      out.trace.converged = true;
      break;
    }
    rel_prev = stat.rel_change;

    double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    double gamma = (t - 1.0) / t_next;
    MultiBandImage y_next = x;
    for (std::size_t q = 0; q < y_next.data.size(); ++q)
      y_next.data[q] += gamma * (x.data[q] - x_prev.data[q]);
    y = std::move(y_next);
    x_prev = x;
    t = t_next;
  }

  // Undo the intensity scaling of the ms input; the solution lives in its range.
  if (cfg.prescale && rm.scale != 1.0) {
    double inv = 1.0 / rm.scale;
    for (double& v : x.data) v = v * inv + rm.offset;
  }
  out.image = std::move(x);
  out.transform = theta;
  return out;
}

}  // namespace sirf
