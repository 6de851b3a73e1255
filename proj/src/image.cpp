#include "sirf/image.hpp"

#include <cmath>
#include <stdexcept>

namespace sirf {

std::string MultiBandImage::shape_string() const {
  return std::to_string(rows) + "x" + std::to_string(cols) + "x" + std::to_string(bands);
}

void ensure_valid(const MultiBandImage& img, const char* what) {
  if (img.rows < 2 || img.cols < 2 || img.bands < 1)
    throw std::invalid_argument(std::string(what) + ": image must be at least 2x2x1, got " +
                                img.shape_string());
  if (img.data.size() != img.plane() * static_cast<std::size_t>(img.bands))
    throw std::invalid_argument(std::string(what) + ": buffer size does not match shape " +
                                img.shape_string());
  if (!all_finite(img))
    throw std::invalid_argument(std::string(what) + ": image contains non-finite values");
}

double dot(const MultiBandImage& a, const MultiBandImage& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) acc += a.data[k] * b.data[k];
  return acc;
}

double norm_fro(const MultiBandImage& a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(const MultiBandImage& a, const MultiBandImage& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k)
    m = std::max(m, std::fabs(a.data[k] - b.data[k]));
  return m;
}

bool all_finite(const MultiBandImage& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace sirf
