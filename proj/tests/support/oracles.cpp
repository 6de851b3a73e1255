#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

using sirf::DualPair;
using sirf::GradientField;
using sirf::MultiBandImage;
using sirf::TransformParams;
using sirf::WarpResult;

GradientField forward_gradient_loop(const MultiBandImage& x) {
  GradientField g{MultiBandImage(x.rows, x.cols, x.bands),
                  MultiBandImage(x.rows, x.cols, x.bands)};
  for (int d = 0; d < x.bands; ++d)
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) {
        if (i < x.rows - 1) g.vert.at(i, j, d) = x.at(i + 1, j, d) - x.at(i, j, d);
        if (j < x.cols - 1) g.horz.at(i, j, d) = x.at(i, j + 1, d) - x.at(i, j, d);
      }
  return g;
}

double group_l21_loop(const GradientField& g) {
  double total = 0.0;
  for (int i = 0; i < g.vert.rows; ++i)
    for (int j = 0; j < g.vert.cols; ++j) {
      double q = 0.0;
      for (int d = 0; d < g.vert.bands; ++d)
        q += g.vert.at(i, j, d) * g.vert.at(i, j, d) + g.horz.at(i, j, d) * g.horz.at(i, j, d);
      total += std::sqrt(q);
    }
  return total;
}

double gradient_residual_loop(const MultiBandImage& x, const MultiBandImage& ref) {
  GradientField gx = forward_gradient_loop(x);
  GradientField gr = forward_gradient_loop(ref);
  for (std::size_t k = 0; k < gx.vert.data.size(); ++k) {
    gx.vert.data[k] -= gr.vert.data[k];
    gx.horz.data[k] -= gr.horz.data[k];
  }
  return group_l21_loop(gx);
}

std::vector<double> SparseOp::apply(const std::vector<double>& v) const {
  std::vector<double> out(out_dim, 0.0);
  for (const Entry& e : entries) out[e.row] += e.value * v[e.col];
  return out;
}

std::vector<double> SparseOp::apply_transpose(const std::vector<double>& v) const {
  std::vector<double> out(in_dim, 0.0);
  for (const Entry& e : entries) out[e.col] += e.value * v[e.row];
  return out;
}

SparseOp assemble_l(int rows, int cols, int bands) {
  const long plane = static_cast<long>(rows) * cols;
  const long per = plane * bands;
  SparseOp op;
  op.out_dim = per;
  op.in_dim = 2 * per;
  auto img = [&](int i, int j, int b) { return b * plane + static_cast<long>(i) * cols + j; };
  auto rr = [&](int i, int j, int b) { return img(i, j, b); };
  auto ss = [&](int i, int j, int b) { return per + img(i, j, b); };
  for (int b = 0; b < bands; ++b)
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        long row = img(i, j, b);
        if (i < rows - 1) op.entries.push_back({row, rr(i, j, b), 1.0});
        if (i >= 1) op.entries.push_back({row, rr(i - 1, j, b), -1.0});
        if (j < cols - 1) op.entries.push_back({row, ss(i, j, b), 1.0});
        if (j >= 1) op.entries.push_back({row, ss(i, j - 1, b), -1.0});
      }
  return op;
}

std::vector<double> stack_dual(const DualPair& d) {
  std::vector<double> v;
  v.reserve(d.r.data.size() + d.s.data.size());
  v.insert(v.end(), d.r.data.begin(), d.r.data.end());
  v.insert(v.end(), d.s.data.begin(), d.s.data.end());
  return v;
}

std::vector<double> stack_image(const MultiBandImage& x) { return x.data; }

MultiBandImage unstack_image(const std::vector<double>& v, int rows, int cols, int bands) {
  MultiBandImage out(rows, cols, bands);
  out.data = v;
  return out;
}

DualPair unstack_dual(const std::vector<double>& v, int rows, int cols, int bands) {
  DualPair d{MultiBandImage(rows, cols, bands), MultiBandImage(rows, cols, bands)};
  std::copy(v.begin(), v.begin() + d.r.data.size(), d.r.data.begin());
  std::copy(v.begin() + d.r.data.size(), v.end(), d.s.data.begin());
  return d;
}

namespace {

double kernel_w(double t) {
  t = std::fabs(t);
  if (t < 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

// One vertical then one horizontal pass; the library resamples horizontally
// first, so rounding is accumulated in a different order.
MultiBandImage resample_loop(const MultiBandImage& x, int out_rows, int out_cols, double factor,
                             bool shrink) {
  auto src_of = [&](int j) {
    return shrink ? (j + 0.5) * factor - 0.5 : (j + 0.5) / factor - 0.5;
  };
  MultiBandImage mid(out_rows, x.cols, x.bands);
  for (int d = 0; d < x.bands; ++d)
    for (int i = 0; i < out_rows; ++i) {
      double ys = src_of(i);
      int base = static_cast<int>(std::floor(ys));
      for (int j = 0; j < x.cols; ++j) {
        double acc = 0.0;
        for (int k = -1; k <= 2; ++k) {
          int src = std::clamp(base + k, 0, x.rows - 1);
          acc += kernel_w(ys - (base + k)) * x.at(src, j, d);
        }
        mid.at(i, j, d) = acc;
      }
    }
  MultiBandImage out(out_rows, out_cols, x.bands);
  for (int d = 0; d < x.bands; ++d)
    for (int j = 0; j < out_cols; ++j) {
      double xs = src_of(j);
      int base = static_cast<int>(std::floor(xs));
      for (int i = 0; i < out_rows; ++i) {
        double acc = 0.0;
        for (int k = -1; k <= 2; ++k) {
          int src = std::clamp(base + k, 0, x.cols - 1);
          acc += kernel_w(xs - (base + k)) * mid.at(i, src, d);
        }
        out.at(i, j, d) = acc;
      }
    }
  return out;
}

}  // namespace

MultiBandImage downsample_loop(const MultiBandImage& x, int factor) {
  if (factor == 1) return x;
  return resample_loop(x, x.rows / factor, x.cols / factor, factor, true);
}

MultiBandImage upsample_loop(const MultiBandImage& x, int factor) {
  if (factor == 1) return x;
  return resample_loop(x, x.rows * factor, x.cols * factor, factor, false);
}

namespace {

void map_point(const TransformParams& t, double x, double y, double& xs, double& ys) {
  if (t.kind == sirf::TransformKind::Translation) {
    xs = x - t.theta[0];
    ys = y - t.theta[1];
  } else {
    xs = t.theta[0] * x + t.theta[1] * y + t.theta[2];
    ys = t.theta[3] * x + t.theta[4] * y + t.theta[5];
  }
}

double bilinear_loop(const MultiBandImage& p, double xs, double ys) {
  int x0 = std::clamp(static_cast<int>(std::floor(xs)), 0, p.cols - 1);
  int y0 = std::clamp(static_cast<int>(std::floor(ys)), 0, p.rows - 1);
  int x1 = std::min(x0 + 1, p.cols - 1);
  int y1 = std::min(y0 + 1, p.rows - 1);
  double fx = xs - x0, fy = ys - y0;
  return (1.0 - fy) * (1.0 - fx) * p.at(y0, x0) + (1.0 - fy) * fx * p.at(y0, x1) +
         fy * (1.0 - fx) * p.at(y1, x0) + fy * fx * p.at(y1, x1);
}

}  // namespace

WarpResult warp_loop(const MultiBandImage& p, const TransformParams& t) {
  WarpResult out;
  out.image = MultiBandImage(p.rows, p.cols, p.bands);
  out.mask.rows = p.rows;
  out.mask.cols = p.cols;
  out.mask.mask.assign(static_cast<std::size_t>(p.rows) * p.cols, 0);
  out.mask.count = 0;
  for (int i = 0; i < p.rows; ++i)
    for (int j = 0; j < p.cols; ++j) {
      double xs, ys;
      map_point(t, j, i, xs, ys);
      if (!(xs >= 0.0 && xs <= p.cols - 1 && ys >= 0.0 && ys <= p.rows - 1)) continue;
      out.mask.mask[static_cast<std::size_t>(i) * p.cols + j] = 1;
      ++out.mask.count;
      int x0 = static_cast<int>(std::floor(xs));
      int y0 = static_cast<int>(std::floor(ys));
      int x1 = std::min(x0 + 1, p.cols - 1);
      int y1 = std::min(y0 + 1, p.rows - 1);
      double fx = xs - x0, fy = ys - y0;
      for (int d = 0; d < p.bands; ++d)
        out.image.at(i, j, d) = (1.0 - fy) * (1.0 - fx) * p.at(y0, x0, d) +
                                (1.0 - fy) * fx * p.at(y0, x1, d) +
                                fy * (1.0 - fx) * p.at(y1, x0, d) + fy * fx * p.at(y1, x1, d);
    }
  return out;
}

double vtv_objective_loop(const MultiBandImage& x, const MultiBandImage& y,
                          const MultiBandImage& ref, double lambda) {
  double fid = 0.0;
  for (int d = 0; d < x.bands; ++d)
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) {
        double delta = x.at(i, j, d) - y.at(i, j, d);
        fid += delta * delta;
      }
  return 0.5 * fid + lambda * gradient_residual_loop(x, ref);
}

double dgs_energy_loop(const MultiBandImage& x, const MultiBandImage& pan,
                       const TransformParams& t, double epsilon, long* overlap) {
  WarpResult w = warp_loop(pan, t);
  if (overlap) *overlap = w.mask.count;
  double total = 0.0;
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) {
      if (!w.mask.at(i, j)) continue;
      double q = epsilon;
      if (i + 1 < x.rows && w.mask.at(i + 1, j)) {
        double dw = w.image.at(i + 1, j) - w.image.at(i, j);
        for (int d = 0; d < x.bands; ++d) {
          double r = (x.at(i + 1, j, d) - x.at(i, j, d)) - dw;
          q += r * r;
        }
      }
      if (j + 1 < x.cols && w.mask.at(i, j + 1)) {
        double dw = w.image.at(i, j + 1) - w.image.at(i, j);
        for (int d = 0; d < x.bands; ++d) {
          double r = (x.at(i, j + 1, d) - x.at(i, j, d)) - dw;
          q += r * r;
        }
      }
      total += std::sqrt(q);
    }
  return total;
}

double sirf_objective_loop(const MultiBandImage& x, const TransformParams& t,
                           const MultiBandImage& ms, const MultiBandImage& pan, double lambda) {
  int c = pan.rows / ms.rows;
  MultiBandImage down = c > 1 ? downsample_loop(x, c) : x;
  double fid = 0.0;
  for (std::size_t k = 0; k < down.data.size(); ++k) {
    double delta = down.data[k] - ms.data[k];
    fid += delta * delta;
  }
  MultiBandImage ref(x.rows, x.cols, x.bands);
  TransformParams id = TransformParams::identity(t.kind);
  bool ident = true;
  for (int k = 0; k < t.dof(); ++k) ident = ident && t.theta[k] == id.theta[k];
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) {
      double v;
      if (ident) {
        v = pan.at(i, j);
      } else {
        double xs, ys;
        map_point(t, j, i, xs, ys);
        xs = std::clamp(xs, 0.0, static_cast<double>(pan.cols - 1));
        ys = std::clamp(ys, 0.0, static_cast<double>(pan.rows - 1));
        v = bilinear_loop(pan, xs, ys);
      }
      for (int d = 0; d < x.bands; ++d) ref.at(i, j, d) = v;
    }
  return 0.5 * fid + lambda * gradient_residual_loop(x, ref);
}

namespace {

MultiBandImage l_op_loop(const DualPair& rs) {
  const int m = rs.r.rows, n = rs.r.cols;
  MultiBandImage out(m, n, rs.r.bands);
  auto rv = [&](int i, int j, int b) { return (i < 0 || i >= m - 1) ? 0.0 : rs.r.at(i, j, b); };
  auto sv = [&](int i, int j, int b) { return (j < 0 || j >= n - 1) ? 0.0 : rs.s.at(i, j, b); };
  for (int b = 0; b < rs.r.bands; ++b)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out.at(i, j, b) = rv(i, j, b) - rv(i - 1, j, b) + sv(i, j, b) - sv(i, j - 1, b);
  return out;
}

DualPair l_adjoint_loop(const MultiBandImage& x) {
  DualPair d{MultiBandImage(x.rows, x.cols, x.bands), MultiBandImage(x.rows, x.cols, x.bands)};
  for (int b = 0; b < x.bands; ++b)
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) {
        if (i < x.rows - 1) d.r.at(i, j, b) = x.at(i, j, b) - x.at(i + 1, j, b);
        if (j < x.cols - 1) d.s.at(i, j, b) = x.at(i, j, b) - x.at(i, j + 1, b);
      }
  return d;
}

DualPair project_loop(DualPair d) {
  const int m = d.r.rows, n = d.r.cols, s = d.r.bands;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      if (i < m - 1 && j < n - 1) {
        double q = 0.0;
        for (int b = 0; b < s; ++b)
          q += d.r.at(i, j, b) * d.r.at(i, j, b) + d.s.at(i, j, b) * d.s.at(i, j, b);
        double nrm = std::sqrt(q);
        if (nrm > 1.0)
          for (int b = 0; b < s; ++b) {
            d.r.at(i, j, b) /= nrm;
            d.s.at(i, j, b) /= nrm;
          }
      } else if (i < m - 1) {
        for (int b = 0; b < s; ++b) {
          d.r.at(i, j, b) = std::clamp(d.r.at(i, j, b), -1.0, 1.0);
          d.s.at(i, j, b) = 0.0;
        }
      } else if (j < n - 1) {
        for (int b = 0; b < s; ++b) {
          d.s.at(i, j, b) = std::clamp(d.s.at(i, j, b), -1.0, 1.0);
          d.r.at(i, j, b) = 0.0;
        }
      } else {
        for (int b = 0; b < s; ++b) {
          d.r.at(i, j, b) = 0.0;
          d.s.at(i, j, b) = 0.0;
        }
      }
    }
  return d;
}

DualPair dual_gradient_step(const DualPair& at, const MultiBandImage& b, double lambda,
                            double step) {
  MultiBandImage g = l_op_loop(at);
  for (std::size_t k = 0; k < g.data.size(); ++k) g.data[k] = b.data[k] - lambda * g.data[k];
  DualPair lt = l_adjoint_loop(g);
  DualPair cand = at;
  for (std::size_t k = 0; k < cand.r.data.size(); ++k) {
    cand.r.data[k] += step * lt.r.data[k];
    cand.s.data[k] += step * lt.s.data[k];
  }
  return project_loop(std::move(cand));
}

MultiBandImage recover_primal(const DualPair& rs, const MultiBandImage& b,
                              const MultiBandImage& ref, double lambda) {
  MultiBandImage x = l_op_loop(rs);
  for (std::size_t k = 0; k < x.data.size(); ++k)
    x.data[k] = b.data[k] - lambda * x.data[k] + ref.data[k];
  return x;
}

}  // namespace

MultiBandImage denoise_unaccelerated(const MultiBandImage& y, const MultiBandImage& ref,
                                     double lambda, int iters) {
  MultiBandImage b(y.rows, y.cols, y.bands);
  for (std::size_t k = 0; k < b.data.size(); ++k) b.data[k] = y.data[k] - ref.data[k];
  DualPair rs{MultiBandImage(y.rows, y.cols, y.bands), MultiBandImage(y.rows, y.cols, y.bands)};
  const double step = 1.0 / (8.0 * lambda);
  for (int k = 0; k < iters; ++k) rs = dual_gradient_step(rs, b, lambda, step);
  return recover_primal(rs, b, ref, lambda);
}

MultiBandImage denoise_accelerated(const MultiBandImage& y, const MultiBandImage& ref,
                                   double lambda, int iters) {
  MultiBandImage b(y.rows, y.cols, y.bands);
  for (std::size_t k = 0; k < b.data.size(); ++k) b.data[k] = y.data[k] - ref.data[k];
  DualPair rs{MultiBandImage(y.rows, y.cols, y.bands), MultiBandImage(y.rows, y.cols, y.bands)};
  DualPair uv = rs;
  double t = 1.0;
  const double step = 1.0 / (8.0 * lambda);
  for (int k = 0; k < iters; ++k) {
    DualPair next = dual_gradient_step(uv, b, lambda, step);
    double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    double gamma = (t - 1.0) / t_next;
    for (std::size_t q = 0; q < next.r.data.size(); ++q) {
      uv.r.data[q] = next.r.data[q] + gamma * (next.r.data[q] - rs.r.data[q]);
      uv.s.data[q] = next.s.data[q] + gamma * (next.s.data[q] - rs.s.data[q]);
    }
    rs = std::move(next);
    t = t_next;
  }
  return recover_primal(rs, b, ref, lambda);
}

double rmse_loop(const MultiBandImage& x, const MultiBandImage& g) {
  double acc = 0.0;
  for (int d = 0; d < x.bands; ++d)
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) {
        double delta = x.at(i, j, d) - g.at(i, j, d);
        acc += delta * delta;
      }
  return std::sqrt(acc / static_cast<double>(x.data.size()));
}

double sam_degrees_loop(const MultiBandImage& x, const MultiBandImage& g) {
  double total = 0.0;
  long counted = 0;
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) {
      double dot = 0.0, nx = 0.0, ng = 0.0;
      for (int d = 0; d < x.bands; ++d) {
        dot += x.at(i, j, d) * g.at(i, j, d);
        nx += x.at(i, j, d) * x.at(i, j, d);
        ng += g.at(i, j, d) * g.at(i, j, d);
      }
      if (nx == 0.0 || ng == 0.0) continue;
      double c = std::clamp(dot / (std::sqrt(nx) * std::sqrt(ng)), -1.0, 1.0);
      total += std::acos(c);
      ++counted;
    }
  return total / static_cast<double>(counted) * (180.0 / 3.14159265358979323846);
}

namespace {

double band_rmse_at(const MultiBandImage& x, const MultiBandImage& g, int d) {
  double acc = 0.0;
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) {
      double delta = x.at(i, j, d) - g.at(i, j, d);
      acc += delta * delta;
    }
  return std::sqrt(acc / (static_cast<double>(x.rows) * x.cols));
}

double band_mean(const MultiBandImage& g, int d) {
  double acc = 0.0;
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j) acc += g.at(i, j, d);
  return acc / (static_cast<double>(g.rows) * g.cols);
}

}  // namespace

double ergas_loop(const MultiBandImage& x, const MultiBandImage& g, int scale) {
  double acc = 0.0;
  for (int d = 0; d < x.bands; ++d) {
    double r = band_rmse_at(x, g, d);
    double mu = band_mean(g, d);
    acc += (r / mu) * (r / mu);
  }
  return (100.0 / scale) * std::sqrt(acc / x.bands);
}

double rase_loop(const MultiBandImage& x, const MultiBandImage& g) {
  double acc = 0.0;
  for (int d = 0; d < x.bands; ++d) {
    double r = band_rmse_at(x, g, d);
    acc += r * r;
  }
  double mu = 0.0;
  for (int d = 0; d < g.bands; ++d) mu += band_mean(g, d);
  mu /= g.bands;
  return (100.0 / mu) * std::sqrt(acc / x.bands);
}

double qave_loop(const MultiBandImage& x, const MultiBandImage& g) {
  constexpr int W = 8;
  double total = 0.0;
  long counted = 0;
  for (int d = 0; d < x.bands; ++d)
    for (int i = 0; i + W <= x.rows; ++i)
      for (int j = 0; j + W <= x.cols; ++j) {
        double mx = 0.0, my = 0.0;
        for (int a = 0; a < W; ++a)
          for (int b = 0; b < W; ++b) {
            mx += x.at(i + a, j + b, d);
            my += g.at(i + a, j + b, d);
          }
        mx /= W * W;
        my /= W * W;
        double vx = 0.0, vy = 0.0, cxy = 0.0;
        for (int a = 0; a < W; ++a)
          for (int b = 0; b < W; ++b) {
            double dx = x.at(i + a, j + b, d) - mx;
            double dy = g.at(i + a, j + b, d) - my;
            vx += dx * dx;
            vy += dy * dy;
            cxy += dx * dy;
          }
        vx /= W * W;
        vy /= W * W;
        cxy /= W * W;
        double den = (vx + vy) * (mx * mx + my * my);
        if (den == 0.0) continue;
        total += 4.0 * cxy * mx * my / den;
        ++counted;
      }
  return total / static_cast<double>(counted);
}

double mssim_loop(const MultiBandImage& x, const MultiBandImage& g, double peak) {
  constexpr int W = 11;
  double w1[W];
  double sum = 0.0;
  for (int k = 0; k < W; ++k) {
    double u = k - 5.0;
    w1[k] = std::exp(-u * u / 4.5);
    sum += w1[k];
  }
  for (double& v : w1) v /= sum;
  const double c1 = 0.0001 * peak * peak;
  const double c2 = 0.0009 * peak * peak;
  double total = 0.0;
  long counted = 0;
  for (int d = 0; d < x.bands; ++d)
    for (int i = 0; i + W <= x.rows; ++i)
      for (int j = 0; j + W <= x.cols; ++j) {
        double mx = 0.0, my = 0.0;
        for (int a = 0; a < W; ++a)
          for (int b = 0; b < W; ++b) {
            double w = w1[a] * w1[b];
            mx += w * x.at(i + a, j + b, d);
            my += w * g.at(i + a, j + b, d);
          }
        double vx = 0.0, vy = 0.0, cxy = 0.0;
        for (int a = 0; a < W; ++a)
          for (int b = 0; b < W; ++b) {
            double w = w1[a] * w1[b];
            double dx = x.at(i + a, j + b, d) - mx;
            double dy = g.at(i + a, j + b, d) - my;
            vx += w * dx * dx;
            vy += w * dy * dy;
            cxy += w * dx * dy;
          }
        total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) /
                 ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++counted;
      }
  return total / static_cast<double>(counted);
}

double fcc_loop(const MultiBandImage& x, const MultiBandImage& pan) {
  const int m = x.rows, n = x.cols;
  auto filt = [&](const MultiBandImage& img, int d, int i, int j) {
    double acc = 8.0 * img.at(i, j, d);
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        if (a != 0 || b != 0) acc -= img.at(i + a, j + b, d);
    return acc;
  };
  double total = 0.0;
  for (int d = 0; d < x.bands; ++d) {
    double mx = 0.0, mp = 0.0;
    long cnt = 0;
    for (int i = 1; i < m - 1; ++i)
      for (int j = 1; j < n - 1; ++j) {
        mx += filt(x, d, i, j);
        mp += filt(pan, 0, i, j);
        ++cnt;
      }
    mx /= cnt;
    mp /= cnt;
    double cxp = 0.0, vx = 0.0, vp = 0.0;
    for (int i = 1; i < m - 1; ++i)
      for (int j = 1; j < n - 1; ++j) {
        double a = filt(x, d, i, j) - mx;
        double b = filt(pan, 0, i, j) - mp;
        cxp += a * b;
        vx += a * a;
        vp += b * b;
      }
    total += std::clamp(cxp / std::sqrt(vx * vp), -1.0, 1.0);
  }
  return total / x.bands;
}

double rel_diff(double a, double b) {
  double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) / scale;
}

}  // namespace oracle
