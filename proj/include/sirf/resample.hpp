#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sirf/image.hpp"

namespace sirf {

enum class TransformKind { Translation, Affine };

// Geometric transform in pixel units, x = column, y = row, origin at the
// top-left pixel center.  Translation uses theta[0..1] = (tx, ty) and maps an
// output pixel to source (x - tx, y - ty), so positive tx shifts content
// right.  Affine uses theta = (a11, a12, b1, a21, a22, b2) mapping output
// (x, y) to source (a11*x + a12*y + b1, a21*x + a22*y + b2).
struct TransformParams {
  TransformKind kind = TransformKind::Translation;
  std::array<double, 6> theta{0, 0, 0, 0, 0, 0};

  static TransformParams identity(TransformKind kind);
  void map(double x, double y, double& xs, double& ys) const;
  int dof() const { return kind == TransformKind::Translation ? 2 : 6; }
  double det() const;  // determinant of the linear part (1 for translations)
};

struct OverlapMask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> mask;
  long count = 0;

  bool at(int i, int j) const { return mask[static_cast<std::size_t>(i) * cols + j] != 0; }
};

struct WarpResult {
  MultiBandImage image;  // zero outside the overlap
  OverlapMask mask;
};

// Separable Catmull-Rom (a = -0.5) resampling with replicate edges and
// half-pixel center alignment.  factor == 1 is the identity.
MultiBandImage downsample(const MultiBandImage& x, int factor);
MultiBandImage upsample(const MultiBandImage& x, int factor);

// Inverse-mapping bilinear warp.  Output pixels whose source coordinate
// falls outside the input are zero with mask false.  The identity transform
// reproduces the input bit-exactly.
WarpResult warp(const MultiBandImage& p, const TransformParams& t);

// Central-difference intensity gradient of the warped image; entries whose
// stencil leaves the overlap (or the image) are zero.
GradientField image_gradient_at_warp(const MultiBandImage& p, const TransformParams& t);

// pyramid[0] is the input, each further level halves both dimensions.
// Throws if a level would need odd dimensions or fall below 16x16.
std::vector<MultiBandImage> build_pyramid(const MultiBandImage& img, int levels);

// Bilinear sample of band 0 at source coords (xs, ys), which must lie in
// [0, cols-1] x [0, rows-1], and its exact spatial derivative (the a.e.
// derivative of the interpolant).
double bilinear_at(const MultiBandImage& p, double xs, double ys, int band = 0);
void bilinear_deriv(const MultiBandImage& p, double xs, double ys, double& gx, double& gy,
                    int band = 0);

// Power-iteration estimate of the dominant eigenvalue magnitude of
// X -> upsample(downsample(X, factor), factor) on a rows x cols field.
double estimate_updown_norm(int rows, int cols, int factor, int iters = 30);

}  // namespace sirf
