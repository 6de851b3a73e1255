#include "sirf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sirf {

std::vector<double> uniform_weights(int bands) {
  if (bands < 1) throw std::invalid_argument("uniform_weights: bands must be >= 1");
  return std::vector<double>(bands, 1.0 / bands);
}

SimulatedPair simulate(const MultiBandImage& gt, int factor,
                       const std::vector<double>& weights,
                       const std::optional<TransformParams>& theta_true) {
  ensure_valid(gt, "simulate");
  if (static_cast<int>(weights.size()) != gt.bands)
    throw std::invalid_argument("simulate: expected " + std::to_string(gt.bands) +
                                " weights, got " + std::to_string(weights.size()));
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("simulate: weights must be nonnegative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("simulate: weights must sum to 1, got " + std::to_string(sum));

  SimulatedPair out;
  out.ms = downsample(gt, factor);

  MultiBandImage pan(gt.rows, gt.cols, 1);
  for (int d = 0; d < gt.bands; ++d) {
    const double* gb = gt.band(d);
    const double w = weights[d];
    for (std::size_t k = 0; k < pan.data.size(); ++k) pan.data[k] += w * gb[k];
  }

  if (theta_true) {
    if (theta_true->kind == TransformKind::Affine && std::fabs(theta_true->det()) < 1e-12)
      throw std::invalid_argument("simulate: transform is singular");
    MultiBandImage moved(pan.rows, pan.cols, 1);
    for (int i = 0; i < pan.rows; ++i)
      for (int j = 0; j < pan.cols; ++j) {
        double xs, ys;
        theta_true->map(static_cast<double>(j), static_cast<double>(i), xs, ys);
        xs = std::clamp(xs, 0.0, static_cast<double>(pan.cols - 1));
        ys = std::clamp(ys, 0.0, static_cast<double>(pan.rows - 1));
        moved.at(i, j, 0) = bilinear_at(pan, xs, ys, 0);
      }
    pan = std::move(moved);
    out.applied = theta_true;
  }
  out.pan = std::move(pan);
  return out;
}

MultiBandImage make_test_scene(const SceneConfig& cfg, std::uint64_t seed) {
  if (cfg.rows < 16 || cfg.cols < 16 || cfg.bands < 1)
    throw std::invalid_argument("make_test_scene: scene must be at least 16x16x1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  MultiBandImage img(cfg.rows, cfg.cols, cfg.bands);
  // Materials share a base luminance with mild per-band tints, the usual
  // multispectral statistic; the pan (a band average) then carries the same
  // edge structure every band does.
  if (!(cfg.tint_lo > 0.0) || !(cfg.tint_hi >= cfg.tint_lo))
    throw std::invalid_argument("make_test_scene: need 0 < tint_lo <= tint_hi");
  auto tint = [&] { return cfg.tint_lo + (cfg.tint_hi - cfg.tint_lo) * unit(rng); };
  for (int d = 0; d < cfg.bands; ++d) {
    double level = cfg.base_level * tint();
    std::fill(img.band(d), img.band(d) + static_cast<std::size_t>(cfg.rows) * cfg.cols, level);
  }

  auto span = [&](int extent) {
    int lo = std::max(4, extent / 10);
    int hi = std::max(lo + 1, extent / 2);
    return lo + static_cast<int>(unit(rng) * (hi - lo));
  };
  for (int r = 0; r < cfg.rectangles; ++r) {
    int h = span(cfg.rows), w = span(cfg.cols);
    int i0 = static_cast<int>(unit(rng) * (cfg.rows - h));
    int j0 = static_cast<int>(unit(rng) * (cfg.cols - w));
    double base = 15.0 + unit(rng) * (cfg.peak / 1.25 - 15.0);
    for (int d = 0; d < cfg.bands; ++d) {
      double level = base * tint();
      for (int i = i0; i < i0 + h; ++i)
        for (int j = j0; j < j0 + w; ++j) img.at(i, j, d) = level;
    }
  }

  for (int b = 0; b < cfg.blobs; ++b) {
    double cx = unit(rng) * (cfg.cols - 1);
    double cy = unit(rng) * (cfg.rows - 1);
    double sigma = 3.0 + unit(rng) * (std::min(cfg.rows, cfg.cols) / 8.0);
    double inv = 1.0 / (2.0 * sigma * sigma);
    double amp = (unit(rng) - 0.5) * 80.0;
    for (int d = 0; d < cfg.bands; ++d) {
      double band_amp = amp * tint();
      for (int i = 0; i < cfg.rows; ++i)
        for (int j = 0; j < cfg.cols; ++j) {
          double dx = j - cx, dy = i - cy;
          img.at(i, j, d) += band_amp * std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
  }

  for (double& v : img.data) v = std::clamp(v, 0.0, cfg.peak);
  return img;
}

}  // namespace sirf
