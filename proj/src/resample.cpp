#include "sirf/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sirf/parallel.hpp"

namespace sirf {

TransformParams TransformParams::identity(TransformKind kind) {
  TransformParams t;
  t.kind = kind;
  if (kind == TransformKind::Affine) t.theta = {1, 0, 0, 0, 1, 0};
  return t;
}

void TransformParams::map(double x, double y, double& xs, double& ys) const {
  if (kind == TransformKind::Translation) {
    xs = x - theta[0];
    ys = y - theta[1];
  } else {
    xs = theta[0] * x + theta[1] * y + theta[2];
    ys = theta[3] * x + theta[4] * y + theta[5];
  }
}

double TransformParams::det() const {
  if (kind == TransformKind::Translation) return 1.0;
  return theta[0] * theta[4] - theta[1] * theta[3];
}

namespace {

// Catmull-Rom kernel, a = -0.5.
inline double cubic_weight(double t) {
  t = std::fabs(t);
  if (t < 1.0) return ((1.5 * t - 2.5) * t) * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

struct Tap {
  int idx[4];
  double w[4];
};

std::vector<Tap> make_taps(int out_len, int in_len, double scale, bool shrink) {
  std::vector<Tap> taps(out_len);
  for (int j = 0; j < out_len; ++j) {
    double xs = shrink ? (j + 0.5) * scale - 0.5 : (j + 0.5) / scale - 0.5;
    int base = static_cast<int>(std::floor(xs));
    for (int k = 0; k < 4; ++k) {
      int src = base - 1 + k;
      taps[j].w[k] = cubic_weight(xs - src);
      taps[j].idx[k] = std::clamp(src, 0, in_len - 1);
    }
  }
  return taps;
}

// Resamples each row of a plane (in: rows x in_cols, out: rows x out_cols).
void resample_cols(const double* in, int rows, int in_cols, double* out,
                   const std::vector<Tap>& taps) {
  int out_cols = static_cast<int>(taps.size());
  parallel_for(rows, [&](int r0, int r1) {
    for (int i = r0; i < r1; ++i) {
      const double* row = in + static_cast<std::size_t>(i) * in_cols;
      double* orow = out + static_cast<std::size_t>(i) * out_cols;
      for (int j = 0; j < out_cols; ++j) {
        const Tap& t = taps[j];
        orow[j] = t.w[0] * row[t.idx[0]] + t.w[1] * row[t.idx[1]] +
                  t.w[2] * row[t.idx[2]] + t.w[3] * row[t.idx[3]];
      }
    }
  });
}

// Resamples each column of a plane (in: in_rows x cols, out: out_rows x cols).
void resample_rows(const double* in, int in_rows, int cols, double* out,
                   const std::vector<Tap>& taps) {
  int out_rows = static_cast<int>(taps.size());
  parallel_for(out_rows, [&](int r0, int r1) {
    for (int i = r0; i < r1; ++i) {
      const Tap& t = taps[i];
      const double* r0p = in + static_cast<std::size_t>(t.idx[0]) * cols;
      const double* r1p = in + static_cast<std::size_t>(t.idx[1]) * cols;
      const double* r2p = in + static_cast<std::size_t>(t.idx[2]) * cols;
      const double* r3p = in + static_cast<std::size_t>(t.idx[3]) * cols;
      double* orow = out + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j < cols; ++j)
        orow[j] = t.w[0] * r0p[j] + t.w[1] * r1p[j] + t.w[2] * r2p[j] + t.w[3] * r3p[j];
    }
  });
}

MultiBandImage resample_image(const MultiBandImage& x, int out_rows, int out_cols,
                              double scale, bool shrink) {
  auto col_taps = make_taps(out_cols, x.cols, scale, shrink);
  auto row_taps = make_taps(out_rows, x.rows, scale, shrink);
  MultiBandImage out(out_rows, out_cols, x.bands);
  std::vector<double> tmp(static_cast<std::size_t>(x.rows) * out_cols);
  for (int d = 0; d < x.bands; ++d) {
    resample_cols(x.band(d), x.rows, x.cols, tmp.data(), col_taps);
    resample_rows(tmp.data(), x.rows, out_cols, out.band(d), row_taps);
  }
  return out;
}

}  // namespace

MultiBandImage downsample(const MultiBandImage& x, int factor) {
  ensure_valid(x, "downsample");
  if (factor < 1) throw std::invalid_argument("downsample: factor must be >= 1");
  if (factor == 1) return x;
  if (x.rows % factor != 0 || x.cols % factor != 0)
    throw std::invalid_argument("downsample: dims " + x.shape_string() +
                                " not divisible by factor " + std::to_string(factor));
  return resample_image(x, x.rows / factor, x.cols / factor, factor, true);
}

MultiBandImage upsample(const MultiBandImage& x, int factor) {
  ensure_valid(x, "upsample");
  if (factor < 1) throw std::invalid_argument("upsample: factor must be >= 1");
  if (factor == 1) return x;
  return resample_image(x, x.rows * factor, x.cols * factor, factor, false);
}

WarpResult warp(const MultiBandImage& p, const TransformParams& t) {
  ensure_valid(p, "warp");
  if (t.kind == TransformKind::Affine && std::fabs(t.det()) < 1e-12)
    throw std::invalid_argument("warp: affine transform is singular");
  const int m = p.rows, n = p.cols, s = p.bands;
  WarpResult out;
  out.image = MultiBandImage(m, n, s);
  out.mask.rows = m;
  out.mask.cols = n;
  out.mask.mask.assign(static_cast<std::size_t>(m) * n, 0);

  parallel_for(m, [&](int i0, int i1) {
    for (int i = i0; i < i1; ++i) {
      for (int j = 0; j < n; ++j) {
        double xs, ys;
        t.map(static_cast<double>(j), static_cast<double>(i), xs, ys);
        if (!(xs >= 0.0 && xs <= n - 1 && ys >= 0.0 && ys <= m - 1)) continue;
        out.mask.mask[static_cast<std::size_t>(i) * n + j] = 1;
        int x0 = static_cast<int>(std::floor(xs));
        int y0 = static_cast<int>(std::floor(ys));
        double fx = xs - x0, fy = ys - y0;
        int x1 = std::min(x0 + 1, n - 1);
        int y1 = std::min(y0 + 1, m - 1);
        for (int d = 0; d < s; ++d) {
          const double* pb = p.band(d);
          double v00 = pb[static_cast<std::size_t>(y0) * n + x0];
          double v01 = pb[static_cast<std::size_t>(y0) * n + x1];
          double v10 = pb[static_cast<std::size_t>(y1) * n + x0];
          double v11 = pb[static_cast<std::size_t>(y1) * n + x1];
          out.image.at(i, j, d) =
              (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
        }
      }
    }
  });
  out.mask.count = 0;
  for (std::size_t k = 0; k < out.mask.mask.size(); ++k) out.mask.count += out.mask.mask[k];
  return out;
}

GradientField image_gradient_at_warp(const MultiBandImage& p, const TransformParams& t) {
  WarpResult w = warp(p, t);
  const int m = p.rows, n = p.cols, s = p.bands;
  GradientField g{MultiBandImage(m, n, s), MultiBandImage(m, n, s)};
  for (int d = 0; d < s; ++d) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        if (!w.mask.at(i, j)) continue;
        if (i > 0 && i < m - 1 && w.mask.at(i - 1, j) && w.mask.at(i + 1, j))
          g.vert.at(i, j, d) = 0.5 * (w.image.at(i + 1, j, d) - w.image.at(i - 1, j, d));
        if (j > 0 && j < n - 1 && w.mask.at(i, j - 1) && w.mask.at(i, j + 1))
          g.horz.at(i, j, d) = 0.5 * (w.image.at(i, j + 1, d) - w.image.at(i, j - 1, d));
      }
    }
  }
  return g;
}

std::vector<MultiBandImage> build_pyramid(const MultiBandImage& img, int levels) {
  ensure_valid(img, "build_pyramid");
  if (levels < 1) throw std::invalid_argument("build_pyramid: levels must be >= 1");
  std::vector<MultiBandImage> pyr;
  pyr.reserve(levels);
  pyr.push_back(img);
  for (int l = 1; l < levels; ++l) {
    const MultiBandImage& cur = pyr.back();
    if (cur.rows % 2 != 0 || cur.cols % 2 != 0)
      throw std::invalid_argument("build_pyramid: level " + std::to_string(l) +
                                  " needs even dims, got " + cur.shape_string());
    if (cur.rows / 2 < 16 || cur.cols / 2 < 16)
      throw std::invalid_argument("build_pyramid: level " + std::to_string(l) +
                                  " would fall below 16x16");
    pyr.push_back(downsample(cur, 2));
  }
  return pyr;
}

double bilinear_at(const MultiBandImage& p, double xs, double ys, int band) {
  int x0 = static_cast<int>(std::floor(xs));
  int y0 = static_cast<int>(std::floor(ys));
  x0 = std::clamp(x0, 0, p.cols - 1);
  y0 = std::clamp(y0, 0, p.rows - 1);
  double fx = xs - x0, fy = ys - y0;
  int x1 = std::min(x0 + 1, p.cols - 1);
  int y1 = std::min(y0 + 1, p.rows - 1);
  const double* pb = p.band(band);
  double v00 = pb[static_cast<std::size_t>(y0) * p.cols + x0];
  double v01 = pb[static_cast<std::size_t>(y0) * p.cols + x1];
  double v10 = pb[static_cast<std::size_t>(y1) * p.cols + x0];
  double v11 = pb[static_cast<std::size_t>(y1) * p.cols + x1];
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
}

void bilinear_deriv(const MultiBandImage& p, double xs, double ys, double& gx, double& gy,
                    int band) {
  int x0 = static_cast<int>(std::floor(xs));
  int y0 = static_cast<int>(std::floor(ys));
  x0 = std::clamp(x0, 0, p.cols - 1);
  y0 = std::clamp(y0, 0, p.rows - 1);
  double fx = xs - x0, fy = ys - y0;
  int x1 = std::min(x0 + 1, p.cols - 1);
  int y1 = std::min(y0 + 1, p.rows - 1);
  const double* pb = p.band(band);
  double v00 = pb[static_cast<std::size_t>(y0) * p.cols + x0];
  double v01 = pb[static_cast<std::size_t>(y0) * p.cols + x1];
  double v10 = pb[static_cast<std::size_t>(y1) * p.cols + x0];
  double v11 = pb[static_cast<std::size_t>(y1) * p.cols + x1];
  gx = (1.0 - fy) * (v01 - v00) + fy * (v11 - v10);
  gy = (1.0 - fx) * (v10 - v00) + fx * (v11 - v01);
}

double estimate_updown_norm(int rows, int cols, int factor, int iters) {
  if (factor == 1) return 1.0;
  // Deterministic pseudo-random start, full-period LCG.
  MultiBandImage v(rows, cols, 1);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (double& x : v.data) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x = static_cast<double>(state >> 11) / static_cast<double>(1ull << 53) - 0.5;
  }
  double ratio = 0.0;
  for (int k = 0; k < iters; ++k) {
    MultiBandImage w = upsample(downsample(v, factor), factor);
    double nw = norm_fro(w), nv = norm_fro(v);
    if (nw == 0.0) return 0.0;
    ratio = nw / nv;
    double inv = 1.0 / nw;
    for (double& x : w.data) x *= inv;
    v = std::move(w);
  }
  return ratio;
}

}  // namespace sirf
