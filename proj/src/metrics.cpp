#include "sirf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sirf {

namespace {

void check_same(const MultiBandImage& x, const MultiBandImage& g, const char* what) {
  ensure_valid(x, what);
  ensure_valid(g, what);
  if (!x.same_shape(g))
    throw std::invalid_argument(std::string(what) + ": shapes differ, " + x.shape_string() +
                                " vs " + g.shape_string());
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

double rmse(const MultiBandImage& x, const MultiBandImage& g) {
  check_same(x, g, "rmse");
  double acc = 0.0;
  for (std::size_t k = 0; k < x.data.size(); ++k) {
    double d = x.data[k] - g.data[k];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(x.data.size()));
}

std::vector<double> band_rmse(const MultiBandImage& x, const MultiBandImage& g) {
  check_same(x, g, "band_rmse");
  std::vector<double> out(x.bands);
  const std::size_t plane = x.plane();
  for (int d = 0; d < x.bands; ++d) {
    const double* xb = x.band(d);
    const double* gb = g.band(d);
    double acc = 0.0;
    for (std::size_t k = 0; k < plane; ++k) {
      double v = xb[k] - gb[k];
      acc += v * v;
    }
    out[d] = std::sqrt(acc / static_cast<double>(plane));
  }
  return out;
}

double psnr(const MultiBandImage& x, const MultiBandImage& g, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be > 0");
  double r = rmse(x, g);
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / r);
}

double sam_degrees(const MultiBandImage& x, const MultiBandImage& g) {
  check_same(x, g, "sam");
  if (x.bands < 2) throw std::invalid_argument("sam: needs at least 2 bands");
  const std::size_t plane = x.plane();
  const int s = x.bands;
  double total = 0.0;
  long counted = 0;
  for (std::size_t k = 0; k < plane; ++k) {
    double dotv = 0.0, nx2 = 0.0, ng2 = 0.0;
    for (int d = 0; d < s; ++d) {
      double xv = x.data[k + d * plane];
      double gv = g.data[k + d * plane];
      dotv += xv * gv;
      nx2 += xv * xv;
      ng2 += gv * gv;
    }
    if (nx2 == 0.0 || ng2 == 0.0) continue;
    double cosv = std::clamp(dotv / std::sqrt(nx2 * ng2), -1.0, 1.0);
    total += std::acos(cosv);
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("sam: all spectral vectors are zero");
  return total / static_cast<double>(counted) * 180.0 / kPi;
}

double ergas(const MultiBandImage& x, const MultiBandImage& g, int scale) {
  check_same(x, g, "ergas");
  if (scale < 1) throw std::invalid_argument("ergas: scale must be >= 1");
  std::vector<double> r = band_rmse(x, g);
  const std::size_t plane = g.plane();
  double acc = 0.0;
  for (int d = 0; d < g.bands; ++d) {
    const double* gb = g.band(d);
    double mean = 0.0;
    for (std::size_t k = 0; k < plane; ++k) mean += gb[k];
    mean /= static_cast<double>(plane);
    if (mean == 0.0) throw std::invalid_argument("ergas: band " + std::to_string(d) +
                                                 " of the reference has zero mean");
    acc += (r[d] * r[d]) / (mean * mean);
  }
  return 100.0 / static_cast<double>(scale) * std::sqrt(acc / static_cast<double>(g.bands));
}

double rase(const MultiBandImage& x, const MultiBandImage& g) {
  check_same(x, g, "rase");
  std::vector<double> r = band_rmse(x, g);
  double mean = 0.0;
  for (double v : g.data) mean += v;
  mean /= static_cast<double>(g.data.size());
  if (mean == 0.0) throw std::invalid_argument("rase: reference has zero mean");
  double acc = 0.0;
  for (double v : r) acc += v * v;
  return 100.0 / mean * std::sqrt(acc / static_cast<double>(g.bands));
}

double qave(const MultiBandImage& x, const MultiBandImage& g) {
  check_same(x, g, "qave");
  constexpr int W = 8;
  if (x.rows < W || x.cols < W)
    throw std::invalid_argument("qave: image smaller than the 8x8 window");
  const int m = x.rows, n = x.cols;
  const double inv = 1.0 / (W * W);
  double total = 0.0;
  long counted = 0;
  for (int d = 0; d < x.bands; ++d) {
    const double* xb = x.band(d);
    const double* gb = g.band(d);
    for (int i = 0; i + W <= m; ++i) {
      for (int j = 0; j + W <= n; ++j) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int a = 0; a < W; ++a) {
          const double* xr = xb + static_cast<std::size_t>(i + a) * n + j;
          const double* gr = gb + static_cast<std::size_t>(i + a) * n + j;
          for (int b = 0; b < W; ++b) {
            double xv = xr[b], gv = gr[b];
            sx += xv;
            sy += gv;
            sxx += xv * xv;
            syy += gv * gv;
            sxy += xv * gv;
          }
        }
        double mx = sx * inv, my = sy * inv;
        double vx = sxx * inv - mx * mx;
        double vy = syy * inv - my * my;
        double cxy = sxy * inv - mx * my;
        double den = (vx + vy) * (mx * mx + my * my);
        if (den == 0.0) continue;
        total += (2.0 * cxy) * (2.0 * (mx * my)) / den;
        ++counted;
      }
    }
  }
  if (counted == 0) throw std::invalid_argument("qave: every window is degenerate");
  return total / static_cast<double>(counted);
}

double mssim(const MultiBandImage& x, const MultiBandImage& g, double peak) {
  check_same(x, g, "mssim");
  constexpr int W = 11;
  if (x.rows < W || x.cols < W)
    throw std::invalid_argument("mssim: image smaller than the 11x11 window");
  if (!(peak > 0.0)) throw std::invalid_argument("mssim: peak must be > 0");

  double w1d[W];
  double sum = 0.0;
  for (int k = 0; k < W; ++k) {
    double u = k - (W - 1) / 2.0;
    w1d[k] = std::exp(-u * u / (2.0 * 1.5 * 1.5));
    sum += w1d[k];
  }
  for (double& v : w1d) v /= sum;

  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const int m = x.rows, n = x.cols;
  double total = 0.0;
  long counted = 0;
  for (int d = 0; d < x.bands; ++d) {
    const double* xb = x.band(d);
    const double* gb = g.band(d);
    for (int i = 0; i + W <= m; ++i) {
      for (int j = 0; j + W <= n; ++j) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int a = 0; a < W; ++a) {
          const double* xr = xb + static_cast<std::size_t>(i + a) * n + j;
          const double* gr = gb + static_cast<std::size_t>(i + a) * n + j;
          for (int b = 0; b < W; ++b) {
            double w = w1d[a] * w1d[b];
            mx += w * xr[b];
            my += w * gr[b];
            sxx += w * xr[b] * xr[b];
            syy += w * gr[b] * gr[b];
            sxy += w * xr[b] * gr[b];
          }
        }
        double vx = sxx - mx * mx;
        double vy = syy - my * my;
        double cxy = sxy - mx * my;
        double num = (2.0 * (mx * my) + c1) * (2.0 * cxy + c2);
        double den = (mx * mx + my * my + c1) * (vx + vy + c2);
        total += num / den;
        ++counted;
      }
    }
  }
  return total / static_cast<double>(counted);
}

double fcc(const MultiBandImage& x, const MultiBandImage& pan) {
  ensure_valid(x, "fcc");
  ensure_valid(pan, "fcc pan");
  if (pan.bands != 1)
    throw std::invalid_argument("fcc: pan must be single-band, got " + pan.shape_string());
  if (x.rows != pan.rows || x.cols != pan.cols)
    throw std::invalid_argument("fcc: image " + x.shape_string() + " and pan " +
                                pan.shape_string() + " differ in size");
  const int m = x.rows, n = x.cols;
  if (m < 3 || n < 3) throw std::invalid_argument("fcc: image smaller than the 3x3 kernel");

  auto laplacian = [m, n](const double* p, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(m - 2) * (n - 2));
    for (int i = 1; i < m - 1; ++i) {
      for (int j = 1; j < n - 1; ++j) {
        const double* r0 = p + static_cast<std::size_t>(i - 1) * n + j;
        const double* r1 = p + static_cast<std::size_t>(i) * n + j;
        const double* r2 = p + static_cast<std::size_t>(i + 1) * n + j;
        out[static_cast<std::size_t>(i - 1) * (n - 2) + (j - 1)] =
            8.0 * r1[0] - r0[-1] - r0[0] - r0[1] - r1[-1] - r1[1] - r2[-1] - r2[0] - r2[1];
      }
    }
  };

  std::vector<double> fp, fx;
  laplacian(pan.band(0), fp);
  const std::size_t len = fp.size();
  double mp = 0.0;
  for (double v : fp) mp += v;
  mp /= static_cast<double>(len);

  double total = 0.0;
  for (int d = 0; d < x.bands; ++d) {
    laplacian(x.band(d), fx);
    double mx = 0.0;
    for (double v : fx) mx += v;
    mx /= static_cast<double>(len);
    double cxy = 0.0, vx = 0.0, vp = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      double a = fx[k] - mx, b = fp[k] - mp;
      cxy += a * b;
      vx += a * a;
      vp += b * b;
    }
    if (vx == 0.0 || vp == 0.0)
      throw std::invalid_argument("fcc: filtered band " + std::to_string(d) + " is constant");
    total += std::clamp(cxy / std::sqrt(vx * vp), -1.0, 1.0);
  }
  return total / static_cast<double>(x.bands);
}

MetricsReport compute_metrics(const MultiBandImage& x, const MultiBandImage& g,
                              const MultiBandImage* pan, int scale, double peak) {
  MetricsReport r;
  r.rmse = rmse(x, g);
  r.band_rmse = band_rmse(x, g);
  r.psnr_db = psnr(x, g, peak);
  r.sam_degrees = x.bands >= 2 ? sam_degrees(x, g)
                               : std::numeric_limits<double>::quiet_NaN();
  r.ergas = ergas(x, g, scale);
  r.rase = rase(x, g);
  r.qave = qave(x, g);
  r.mssim = mssim(x, g, peak);
  r.fcc = pan ? fcc(x, *pan) : std::numeric_limits<double>::quiet_NaN();
  r.scale = scale;
  r.peak = peak;
  return r;
}

}  // namespace sirf
