#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sirf/image.hpp"
#include "sirf/resample.hpp"

namespace sirf {

struct SimulatedPair {
  MultiBandImage ms;   // GT reduced by the scale factor
  MultiBandImage pan;  // weighted band sum at full resolution, optionally warped
  std::optional<TransformParams> applied;
};

// Wald-style observation synthesis from a ground-truth tensor. `weights` must
// have one nonnegative entry per band and sum to 1 (within 1e-9). When a
// transform is given the pan is resampled by it; pixels leaving the frame
// replicate the edge so the output stays dense.
SimulatedPair simulate(const MultiBandImage& gt, int factor,
                       const std::vector<double>& weights,
                       const std::optional<TransformParams>& theta_true = std::nullopt);

std::vector<double> uniform_weights(int bands);

struct SceneConfig {
  int rows = 128;
  int cols = 128;
  int bands = 4;
  int rectangles = 24;
  int blobs = 4;
  double base_level = 60.0;
  double peak = 255.0;
  // Per-band reflectance factors are drawn uniformly from this range; a
  // wider range means more spectrally diverse materials.
  double tint_lo = 0.6;
  double tint_hi = 1.4;
};

// Piecewise-constant test scene: seeded rectangles with per-band levels over a
// shared geometry, plus a few smooth Gaussian bumps so gradients are not all
// axis-aligned. Deterministic for a given (config, seed).
MultiBandImage make_test_scene(const SceneConfig& cfg, std::uint64_t seed);

}  // namespace sirf
