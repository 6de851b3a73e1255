#include "sirf/registration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sirf {

double DgsEnergy::normalized() const {
  if (overlap == 0) return std::numeric_limits<double>::infinity();
  return energy / static_cast<double>(overlap);
}

namespace {

void check_pair(const MultiBandImage& x, const MultiBandImage& pan, const char* what) {
  ensure_valid(x, what);
  ensure_valid(pan, what);
  if (pan.bands != 1)
    throw std::invalid_argument(std::string(what) + ": pan must be single-band, got " +
                                pan.shape_string());
  if (x.rows != pan.rows || x.cols != pan.cols)
    throw std::invalid_argument(std::string(what) + ": image " + x.shape_string() +
                                " and pan " + pan.shape_string() + " differ in size");
}

}  // namespace

DgsEnergy dgs_energy(const MultiBandImage& x, const MultiBandImage& pan,
                     const TransformParams& t, double epsilon) {
  check_pair(x, pan, "dgs_energy");
  if (!(epsilon > 0.0)) throw std::invalid_argument("dgs_energy: epsilon must be > 0");
  WarpResult w = warp(pan, t);
  const int m = x.rows, n = x.cols, s = x.bands;
  const std::size_t plane = x.plane();
  const double* wp = w.image.band(0);

  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!w.mask.at(i, j)) continue;
      std::size_t base = static_cast<std::size_t>(i) * n + j;
      bool mv = i + 1 < m && w.mask.at(i + 1, j);
      bool mh = j + 1 < n && w.mask.at(i, j + 1);
      double q = epsilon;
      if (mv) {
        double dw = wp[base + n] - wp[base];
        for (int d = 0; d < s; ++d) {
          const double* xb = x.data.data() + d * plane;
          double r = (xb[base + n] - xb[base]) - dw;
          q += r * r;
        }
      }
      if (mh) {
        double dw = wp[base + 1] - wp[base];
        for (int d = 0; d < s; ++d) {
          const double* xb = x.data.data() + d * plane;
          double r = (xb[base + 1] - xb[base]) - dw;
          q += r * r;
        }
      }
      total += std::sqrt(q);
    }
  }
  return DgsEnergy{total, w.mask.count};
}

std::vector<double> dgs_gradient(const MultiBandImage& x, const MultiBandImage& pan,
                                 const TransformParams& t, double epsilon) {
  check_pair(x, pan, "dgs_gradient");
  if (!(epsilon > 0.0)) throw std::invalid_argument("dgs_gradient: epsilon must be > 0");
  WarpResult w = warp(pan, t);
  if (w.mask.count == 0)
    throw std::invalid_argument("dgs_gradient: transform has no overlap");
  const int m = x.rows, n = x.cols, s = x.bands;
  const std::size_t plane = x.plane();
  const double* wp = w.image.band(0);

  // Per-pixel weights of the two difference directions: sum over bands of
  // residual / phi, zero where a term is inactive.
  MultiBandImage b1(m, n, 1), b2(m, n, 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!w.mask.at(i, j)) continue;
      std::size_t base = static_cast<std::size_t>(i) * n + j;
      bool mv = i + 1 < m && w.mask.at(i + 1, j);
      bool mh = j + 1 < n && w.mask.at(i, j + 1);
      double q = epsilon, sv = 0.0, sh = 0.0;
      if (mv) {
        double dw = wp[base + n] - wp[base];
        for (int d = 0; d < s; ++d) {
          const double* xb = x.data.data() + d * plane;
          double r = (xb[base + n] - xb[base]) - dw;
          q += r * r;
          sv += r;
        }
      }
      if (mh) {
        double dw = wp[base + 1] - wp[base];
        for (int d = 0; d < s; ++d) {
          const double* xb = x.data.data() + d * plane;
          double r = (xb[base + 1] - xb[base]) - dw;
          q += r * r;
          sh += r;
        }
      }
      double phi = std::sqrt(q);
      if (mv) b1.data[base] = sv / phi;
      if (mh) b2.data[base] = sh / phi;
    }
  }

  // dE/dW has the same backward-difference structure as l_op.
  std::vector<double> grad(t.dof(), 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      std::size_t base = static_cast<std::size_t>(i) * n + j;
      double dEdW = b1.data[base] + b2.data[base];
      if (i > 0) dEdW -= b1.data[base - n];
      if (j > 0) dEdW -= b2.data[base - 1];
      if (dEdW == 0.0) continue;
      // Nonzero entries only occur inside the overlap, where the source
      // coordinate is valid.
      double xs, ys;
      t.map(static_cast<double>(j), static_cast<double>(i), xs, ys);
      double gx, gy;
      bilinear_deriv(pan, xs, ys, gx, gy);
      if (t.kind == TransformKind::Translation) {
        grad[0] -= dEdW * gx;
        grad[1] -= dEdW * gy;
      } else {
        double xd = static_cast<double>(j), yd = static_cast<double>(i);
        grad[0] += dEdW * gx * xd;
        grad[1] += dEdW * gx * yd;
        grad[2] += dEdW * gx;
        grad[3] += dEdW * gy * xd;
        grad[4] += dEdW * gy * yd;
        grad[5] += dEdW * gy;
      }
    }
  }
  double inv = 1.0 / static_cast<double>(w.mask.count);
  for (double& g : grad) g *= inv;
  return grad;
}

int auto_pyramid_levels(int rows, int cols) {
  int mn = std::min(rows, cols);
  int levels = 1;
  if (mn >= 64) levels = static_cast<int>(std::floor(std::log2(mn / 32.0))) + 1;
  levels = std::min(levels, 4);
  while (levels > 1) {
    int f = 1 << (levels - 1);
    if (rows % f == 0 && cols % f == 0 && rows / f >= 16 && cols / f >= 16) break;
    --levels;
  }
  return std::max(levels, 1);
}

namespace {

TransformParams scale_translation(TransformParams t, double factor) {
  if (t.kind == TransformKind::Translation) {
    t.theta[0] *= factor;
    t.theta[1] *= factor;
  } else {
    t.theta[2] *= factor;
    t.theta[5] *= factor;
  }
  return t;
}

}  // namespace

RegistrationResult register_images(const MultiBandImage& x, const MultiBandImage& pan,
                                   const TransformParams& init,
                                   const RegistrationConfig& cfg) {
  check_pair(x, pan, "register_images");
  if (!(cfg.epsilon > 0.0) || !(cfg.initial_step > 0.0) || cfg.eta <= 0.0 || cfg.eta >= 1.0)
    throw std::invalid_argument("register_images: invalid config");
  if (cfg.inner_iters < 1) throw std::invalid_argument("register_images: inner_iters >= 1");

  int levels = cfg.pyramid_levels > 0 ? cfg.pyramid_levels : auto_pyramid_levels(x.rows, x.cols);
  std::vector<MultiBandImage> xp = build_pyramid(x, levels);
  std::vector<MultiBandImage> pp = build_pyramid(pan, levels);

  RegistrationResult res;
  res.theta = scale_translation(init, 1.0 / static_cast<double>(1 << (levels - 1)));

  for (int lvl = levels - 1; lvl >= 0; --lvl) {
    const MultiBandImage& xl = xp[lvl];
    const MultiBandImage& pl = pp[lvl];
    double up = static_cast<double>(1 << lvl);

    DgsEnergy e0 = dgs_energy(xl, pl, res.theta, cfg.epsilon);
    if (e0.overlap == 0)
      throw std::invalid_argument("register_images: no overlap at the initial transform");
    if (!std::isfinite(e0.energy))
      throw std::invalid_argument("register_images: non-finite energy at the initial transform");
    double cur = e0.normalized();
    long cur_overlap = e0.overlap;

    double t = cfg.initial_step;
    for (int it = 0; it < cfg.inner_iters; ++it) {
      std::vector<double> g = dgs_gradient(xl, pl, res.theta, cfg.epsilon);
      bool accepted = false;
      for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
        TransformParams cand = res.theta;
        for (int k = 0; k < cand.dof(); ++k) cand.theta[k] -= t * g[k];
        double val = std::numeric_limits<double>::infinity();
        long ov = 0;
        if (!(cand.kind == TransformKind::Affine && std::fabs(cand.det()) < 1e-12)) {
          DgsEnergy e = dgs_energy(xl, pl, cand, cfg.epsilon);
          val = e.normalized();
          ov = e.overlap;
        }
        if (val > cur) {
          t *= cfg.eta;
          continue;
        }
        res.theta = cand;
        cur = val;
        cur_overlap = ov;
        res.trace.steps.push_back(
            {scale_translation(res.theta, up), cur, t, cur_overlap, lvl});
        accepted = true;
        break;
      }
      if (!accepted) break;  // step collapsed, this level is done
    }
    if (lvl > 0) res.theta = scale_translation(res.theta, 2.0);
  }
  return res;
}

}  // namespace sirf
