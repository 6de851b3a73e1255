#include "sirf/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sirf {

GradientField forward_gradient(const MultiBandImage& x) {
  const int m = x.rows, n = x.cols, s = x.bands;
  GradientField g{MultiBandImage(m, n, s), MultiBandImage(m, n, s)};
  for (int d = 0; d < s; ++d) {
    const double* p = x.band(d);
    double* gv = g.vert.band(d);
    double* gh = g.horz.band(d);
    for (int i = 0; i < m; ++i) {
      const double* row = p + static_cast<std::size_t>(i) * n;
      const double* next = row + n;
      double* v = gv + static_cast<std::size_t>(i) * n;
      double* h = gh + static_cast<std::size_t>(i) * n;
      if (i < m - 1)
        for (int j = 0; j < n; ++j) v[j] = next[j] - row[j];
      for (int j = 0; j < n - 1; ++j) h[j] = row[j + 1] - row[j];
    }
  }
  return g;
}

MultiBandImage l_op(const DualPair& d) {
  if (!d.r.same_shape(d.s))
    throw std::invalid_argument("l_op: r shape " + d.r.shape_string() +
                                " does not match s shape " + d.s.shape_string());
  const int m = d.r.rows, n = d.r.cols, s = d.r.bands;
  MultiBandImage out(m, n, s);
  // Entries in the last row of r / last column of s are structurally zero.
  auto rv = [&](int i, int j, int b) {
    return (i < 0 || i >= m - 1) ? 0.0 : d.r.at(i, j, b);
  };
  auto sv = [&](int i, int j, int b) {
    return (j < 0 || j >= n - 1) ? 0.0 : d.s.at(i, j, b);
  };
  for (int b = 0; b < s; ++b)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out.at(i, j, b) = rv(i, j, b) - rv(i - 1, j, b) + sv(i, j, b) - sv(i, j - 1, b);
  return out;
}

DualPair l_adjoint(const MultiBandImage& x) {
  const int m = x.rows, n = x.cols, s = x.bands;
  DualPair d{MultiBandImage(m, n, s), MultiBandImage(m, n, s)};
  for (int b = 0; b < s; ++b) {
    const double* p = x.band(b);
    double* r = d.r.band(b);
    double* sp = d.s.band(b);
    for (int i = 0; i < m; ++i) {
      const double* row = p + static_cast<std::size_t>(i) * n;
      double* rr = r + static_cast<std::size_t>(i) * n;
      double* sr = sp + static_cast<std::size_t>(i) * n;
      if (i < m - 1)
        for (int j = 0; j < n; ++j) rr[j] = row[j] - row[j + n];
      for (int j = 0; j < n - 1; ++j) sr[j] = row[j] - row[j + 1];
    }
  }
  return d;
}

DualPair project_dual(DualPair d) {
  if (!d.r.same_shape(d.s))
    throw std::invalid_argument("project_dual: r shape " + d.r.shape_string() +
                                " does not match s shape " + d.s.shape_string());
  const int m = d.r.rows, n = d.r.cols, s = d.r.bands;
  const std::size_t plane = d.r.plane();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      std::size_t base = static_cast<std::size_t>(i) * n + j;
      if (i < m - 1 && j < n - 1) {
        double q = 0.0;
        for (int b = 0; b < s; ++b) {
          double rv = d.r.data[base + b * plane];
          double sv = d.s.data[base + b * plane];
          q += rv * rv + sv * sv;
        }
        double nrm = std::sqrt(q);
        if (nrm > 1.0) {
          double inv = 1.0 / nrm;
          for (int b = 0; b < s; ++b) {
            d.r.data[base + b * plane] *= inv;
            d.s.data[base + b * plane] *= inv;
          }
        }
      } else if (i < m - 1) {  // last column: clamp r, s is unused there
        for (int b = 0; b < s; ++b) {
          d.r.data[base + b * plane] = std::clamp(d.r.data[base + b * plane], -1.0, 1.0);
          d.s.data[base + b * plane] = 0.0;
        }
      } else if (j < n - 1) {  // last row: clamp s, r is unused there
        for (int b = 0; b < s; ++b) {
          d.s.data[base + b * plane] = std::clamp(d.s.data[base + b * plane], -1.0, 1.0);
          d.r.data[base + b * plane] = 0.0;
        }
      } else {
        for (int b = 0; b < s; ++b) {
          d.r.data[base + b * plane] = 0.0;
          d.s.data[base + b * plane] = 0.0;
        }
      }
    }
  }
  return d;
}

double group_l21_norm(const GradientField& g) {
  if (!g.vert.same_shape(g.horz))
    throw std::invalid_argument("group_l21_norm: mismatched gradient planes");
  const int m = g.vert.rows, n = g.vert.cols, s = g.vert.bands;
  const std::size_t plane = g.vert.plane();
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      std::size_t base = static_cast<std::size_t>(i) * n + j;
      double q = 0.0;
      for (int b = 0; b < s; ++b) {
        double v = g.vert.data[base + b * plane];
        double h = g.horz.data[base + b * plane];
        q += v * v + h * h;
      }
      total += std::sqrt(q);
    }
  }
  return total;
}

double group_l21_gradient_residual(const MultiBandImage& x, const MultiBandImage& ref) {
  if (!x.same_shape(ref))
    throw std::invalid_argument("gradient residual: shape " + x.shape_string() +
                                " vs " + ref.shape_string());
  const int m = x.rows, n = x.cols, s = x.bands;
  const std::size_t plane = x.plane();
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      std::size_t base = static_cast<std::size_t>(i) * n + j;
      double q = 0.0;
      for (int b = 0; b < s; ++b) {
        const double* xp = x.data.data() + b * plane;
        const double* rp = ref.data.data() + b * plane;
        if (i < m - 1) {
          double v = (xp[base + n] - xp[base]) - (rp[base + n] - rp[base]);
          q += v * v;
        }
        if (j < n - 1) {
          double h = (xp[base + 1] - xp[base]) - (rp[base + 1] - rp[base]);
          q += h * h;
        }
      }
      total += std::sqrt(q);
    }
  }
  return total;
}

MultiBandImage replicate_pan(const MultiBandImage& pan, int bands) {
  if (pan.bands != 1)
    throw std::invalid_argument("replicate_pan: input must be single-band, got " +
                                pan.shape_string());
  if (bands < 1) throw std::invalid_argument("replicate_pan: bands must be >= 1");
  MultiBandImage out(pan.rows, pan.cols, bands);
  for (int d = 0; d < bands; ++d)
    std::copy(pan.data.begin(), pan.data.end(), out.band(d));
  return out;
}

}  // namespace sirf
