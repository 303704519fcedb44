#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace tuckercheb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Extents = std::vector<std::size_t>;

/// Ordered set of 1-based indices into a single tensor mode.
///
/// Selected row sets produced by the interpolatory decompositions live here.
/// Indices are stored 1-based; `zero_based()` gives the offsets used for
/// memory access.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::vector<std::size_t> indices, std::size_t parent_extent);

  static IndexSet full(std::size_t extent);
  static IndexSet from_zero_based(std::span<const std::size_t> offsets,
                                  std::size_t parent_extent);

  [[nodiscard]] std::size_t size() const { return indices_.size(); }
  [[nodiscard]] bool empty() const { return indices_.empty(); }
  [[nodiscard]] std::size_t parent_extent() const { return parent_extent_; }
  [[nodiscard]] const std::vector<std::size_t>& indices() const {
    return indices_;
  }
  [[nodiscard]] std::size_t operator[](std::size_t k) const {
    return indices_[k];
  }
  [[nodiscard]] std::size_t offset(std::size_t k) const {
    return indices_[k] - 1;
  }
  [[nodiscard]] std::vector<std::size_t> zero_based() const;

  bool operator==(const IndexSet&) const = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t parent_extent_ = 0;
};

/// Dense N-mode array stored column-major (mode 0 varies fastest).
///
/// Modes and entry multi-indices are 0-based.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Extents extents);
  DenseTensor(Extents extents, std::vector<double> values);

  [[nodiscard]] std::size_t order() const { return extents_.size(); }
  [[nodiscard]] const Extents& extents() const { return extents_; }
  [[nodiscard]] std::size_t extent(std::size_t mode) const {
    return extents_[mode];
  }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] const double* data() const { return values_.data(); }
  [[nodiscard]] double* data() { return values_.data(); }

  [[nodiscard]] std::size_t linear_index(
      std::span<const std::size_t> index) const;
  void multi_index(std::size_t linear, std::span<std::size_t> index) const;

  [[nodiscard]] double operator()(std::span<const std::size_t> index) const {
    return values_[linear_index(index)];
  }
  double& operator()(std::span<const std::size_t> index) {
    return values_[linear_index(index)];
  }
  [[nodiscard]] double operator[](std::size_t linear) const {
    return values_[linear];
  }
  double& operator[](std::size_t linear) { return values_[linear]; }

  [[nodiscard]] double norm() const;

  bool operator==(const DenseTensor&) const = default;

 private:
  Extents extents_;
  std::vector<double> values_;
};

std::size_t product(std::span<const std::size_t> extents);

/// Mode-`mode` unfolding: rows index the mode, columns enumerate the
/// remaining modes with lower-numbered modes varying fastest.
Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of `unfold` for a tensor of the given extents.
DenseTensor fold(const Matrix& m, std::size_t mode, const Extents& extents);

/// Unfolding of the first `leading` modes into rows and the rest into columns.
Matrix unfold_first(const DenseTensor& t, std::size_t leading);

/// Y = T x_mode A, i.e. unfold(Y, mode) == A * unfold(T, mode).
DenseTensor mode_product(const DenseTensor& t, const Matrix& a,
                         std::size_t mode);

struct ModeFactor {
  Matrix matrix;
  std::size_t mode;
};

/// Applies several mode products over distinct modes. Products that shrink
/// the tensor are applied first.
DenseTensor multi_mode_product(const DenseTensor& t,
                               std::span<const ModeFactor> factors);

/// Copies the entries at the cross product of the index sets.
DenseTensor subtensor(const DenseTensor& t, std::span<const IndexSet> sets);

/// Row i of the result is kron(A.row(i), B.row(i)); B's column index varies
/// fastest, matching the column-major vectorization of outer products.
Matrix rowwise_khatri_rao(const Matrix& a, const Matrix& b);

double frobenius_distance(const DenseTensor& a, const DenseTensor& b);

}  // namespace tuckercheb
