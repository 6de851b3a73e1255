#pragma once

#include <vector>

#include "sirf/image.hpp"

namespace sirf {

double rmse(const MultiBandImage& x, const MultiBandImage& g);
std::vector<double> band_rmse(const MultiBandImage& x, const MultiBandImage& g);

// 20*log10(peak/rmse); +infinity when the images are identical.
double psnr(const MultiBandImage& x, const MultiBandImage& g, double peak = 255.0);

// Mean spectral angle in degrees.  Pixels where either spectral vector is
// zero are skipped; throws if every pixel is skipped.  Needs >= 2 bands.
double sam_degrees(const MultiBandImage& x, const MultiBandImage& g);

// 100/c * sqrt(mean_d(rmse_d^2 / mean_d^2)); band means of g must be nonzero.
double ergas(const MultiBandImage& x, const MultiBandImage& g, int scale);

// 100/mean(g) * sqrt(mean_d rmse_d^2).
double rase(const MultiBandImage& x, const MultiBandImage& g);

// Mean universal quality index over 8x8 sliding windows and bands;
// degenerate windows are skipped.
double qave(const MultiBandImage& x, const MultiBandImage& g);

// Mean SSIM, 11x11 Gaussian window (sigma 1.5), C1=(0.01*peak)^2,
// C2=(0.03*peak)^2, valid window positions only.
double mssim(const MultiBandImage& x, const MultiBandImage& g, double peak = 255.0);

// Mean over bands of the Pearson correlation between Laplacian-filtered
// band and Laplacian-filtered pan (3x3 kernel, all ones negated with +8
// center), over the valid interior.
double fcc(const MultiBandImage& x, const MultiBandImage& pan);

struct MetricsReport {
  double rmse = 0.0;
  std::vector<double> band_rmse;
  double psnr_db = 0.0;
  double sam_degrees = 0.0;   // NaN when bands < 2
  double ergas = 0.0;
  double rase = 0.0;
  double qave = 0.0;
  double mssim = 0.0;
  double fcc = 0.0;           // NaN when no pan given
  int scale = 0;
  double peak = 0.0;
};

MetricsReport compute_metrics(const MultiBandImage& x, const MultiBandImage& g,
                              const MultiBandImage* pan, int scale, double peak = 255.0);

}  // namespace sirf
