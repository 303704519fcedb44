#pragma once

#include "tuckercheb/tensor.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tuckercheb {

/// Raised when a numerical step fails (singular selection, non-finite data).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SketchConfig {
  std::size_t rank = 1;
  std::size_t oversample = 0;
  std::uint64_t seed = 0;
  /// Independent Gaussian stream under `seed`; per-mode work uses the mode.
  std::uint64_t stream = 0;

  [[nodiscard]] std::size_t sketch_size() const { return rank + oversample; }
};

/// X ~= F * X(J, :), with F(J, :) == I.
struct RridResult {
  Matrix factor;
  IndexSet selected;
  std::uint64_t rng_draws = 0;
};

struct SvdFactors {
  Matrix u;
  Vector s;
  Matrix v;
};

/// i.i.d. N(0,1) matrix filled column-major from the given stream.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::uint64_t seed, std::uint64_t stream = 0);

/// Orthonormal basis of range(Y) via Householder QR (thin Q, Y.cols() columns).
Matrix orthonormal_basis(const Matrix& y);

/// Q with orthonormal columns spanning range(X * Omega).
Matrix range_finder(const Matrix& x, const SketchConfig& cfg);

/// First `count` pivots of Businger-Golub column-pivoted QR on `qt`.
/// Ties go to the lowest column index.
IndexSet pivot_select(const Matrix& qt, std::size_t count);

/// Steps shared by every interpolatory decomposition once a sketch Y of X's
/// range exists: thin QR, pivot selection on Q^T, F = Q * Q(J,:)^{-1}.
RridResult interpolatory_rows(const Matrix& sketch);
/// Same, starting from an orthonormal basis Q (rows >= cols).
RridResult interpolatory_from_basis(const Matrix& q);

/// Randomized row interpolatory decomposition.
RridResult rrid(const Matrix& x, const SketchConfig& cfg);

/// Rank-r SVD factors (dense).
SvdFactors truncated_svd(const Matrix& b, std::size_t rank);

/// Randomized SVD with a Gaussian sketch of size rank + oversample,
/// truncated to `rank`.
SvdFactors randomized_svd(const Matrix& a, std::size_t rank,
                          std::size_t oversample, std::uint64_t seed);

/// Expected-error bound for the structure-preserving HOSVD:
/// sum_j g^j * sqrt((1 + r/(p-1)) * sum_{i>r} sigma_i(M_(j))^2),
/// g = sqrt(1 + 4 l (n - l)), l = r + p.
double theorem1_bound(const std::vector<std::vector<double>>& mode_singular_values,
                      std::size_t rank, std::size_t oversample, std::size_t n);

}  // namespace tuckercheb
