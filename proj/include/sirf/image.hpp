#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sirf {

// Dense multi-band raster of doubles, band-major planar layout:
// data[(d*rows + i)*cols + j] holds band d, row i, column j.
struct MultiBandImage {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  std::vector<double> data;

  MultiBandImage() = default;
  MultiBandImage(int rows_, int cols_, int bands_, double fill = 0.0)
      : rows(rows_), cols(cols_), bands(bands_),
        data(static_cast<std::size_t>(rows_) * cols_ * bands_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(rows) * cols; }

  std::size_t idx(int i, int j, int d = 0) const {
    return (static_cast<std::size_t>(d) * rows + i) * cols + j;
  }
  double& at(int i, int j, int d = 0) { return data[idx(i, j, d)]; }
  double at(int i, int j, int d = 0) const { return data[idx(i, j, d)]; }

  double* band(int d) { return data.data() + static_cast<std::size_t>(d) * plane(); }
  const double* band(int d) const { return data.data() + static_cast<std::size_t>(d) * plane(); }

  bool same_shape(const MultiBandImage& o) const {
    return rows == o.rows && cols == o.cols && bands == o.bands;
  }
  std::string shape_string() const;
};

// Forward-difference gradient planes, one pair per band.
// vert = down-difference (next row minus this row), horz = right-difference.
struct GradientField {
  MultiBandImage vert;
  MultiBandImage horz;
};

// Dual variables of the denoising problem, same layout as the image they
// correspond to.  r pairs with vertical differences, s with horizontal ones.
struct DualPair {
  MultiBandImage r;
  MultiBandImage s;
};

// Throws std::invalid_argument unless img is at least 2x2x1 with matching
// buffer size and all-finite values.
void ensure_valid(const MultiBandImage& img, const char* what);

double dot(const MultiBandImage& a, const MultiBandImage& b);
double norm_fro(const MultiBandImage& a);
double max_abs_diff(const MultiBandImage& a, const MultiBandImage& b);
bool all_finite(const MultiBandImage& a);

}  // namespace sirf
