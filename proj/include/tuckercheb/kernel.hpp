#pragma once

#include "tuckercheb/tensor.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tuckercheb {

enum class KernelKind {
  laplace3d,     // 1/r
  biharmonic,    // 1/r^2
  laplace2d,     // -log r
  thinplate,     // r^2 log r
  multiquadric,  // sqrt(1 + (r/sigma)^2)
  gaussian,      // exp(-(r/sigma)^2)
  matern12,      // exp(-r/sigma)
  matern32,      // (1 + sqrt3 r/sigma) exp(-sqrt3 r/sigma)
  matern52,      // (1 + sqrt5 r/sigma + 5/3 (r/sigma)^2) exp(-sqrt5 r/sigma)
};

/// Radial kernel kappa(x, y) = phi(r).
///
/// With per-dimension `scales` the distance is anisotropic,
/// r = sqrt(sum_j ((x_j - y_j) / scales_j)^2), and `sigma` is not applied.
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double sigma = 1.0;
  std::vector<double> scales;

  /// Catalog name such as "matern32"; throws on unknown names or sigma <= 0.
  static KernelSpec named(std::string_view name, double sigma = 1.0);

  [[nodiscard]] std::string_view name() const;
  /// phi is infinite (or undefined) at r = 0.
  [[nodiscard]] bool singular_at_zero() const;
  [[nodiscard]] double phi(double r) const;
  [[nodiscard]] double distance(const double* x, const double* y,
                                std::size_t dims) const;
  [[nodiscard]] double operator()(std::span<const double> x,
                                  std::span<const double> y) const;
  /// Throws std::invalid_argument unless sigma and scales are positive.
  void validate() const;
};

std::vector<std::string> kernel_names();

/// K(i, j) = kappa(X.row(i), Y.row(j)); rows of X and Y are points.
/// Coincident points are rejected for kernels singular at zero.
Matrix dense_kernel_matrix(const Matrix& x, const Matrix& y,
                           const KernelSpec& k);

}  // namespace tuckercheb
