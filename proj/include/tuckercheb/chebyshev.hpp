#pragma once

#include "tuckercheb/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tuckercheb {

/// Closed interval [lo, hi] with lo < hi.
class Interval {
 public:
  Interval(double lo, double hi);

  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }
  [[nodiscard]] double width() const { return hi_ - lo_; }
  [[nodiscard]] bool contains(double x) const { return x >= lo_ && x <= hi_; }

  bool operator==(const Interval&) const = default;

 private:
  double lo_;
  double hi_;
};

/// Maps [-1, 1] onto the interval.
double affine_map(const Interval& iv, double x);
/// Maps the interval onto [-1, 1]; points outside map outside.
double inverse_map(const Interval& iv, double x);

/// First-kind Chebyshev points cos((2k-1)pi/(2n)), k = 1..n, descending.
std::vector<double> cheb_nodes(std::size_t n);

/// n first-kind Chebyshev points mapped to an interval, with the table of
/// T_k evaluated at the reference nodes used by the cardinal functions.
class ChebGrid {
 public:
  ChebGrid(Interval interval, std::size_t n);

  [[nodiscard]] const Interval& interval() const { return interval_; }
  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
  [[nodiscard]] double node(std::size_t i) const { return nodes_[i]; }

  /// Weighted Chebyshev values [1, 2T_1(u), ..., 2T_{n-1}(u)] at u = I^{-1}(x).
  [[nodiscard]] RowVector weighted_chebyshev(double x) const;
  /// Table T_k(xi_i): row i is node i, column k is degree k.
  [[nodiscard]] const Matrix& node_table() const { return table_; }

 private:
  Interval interval_;
  std::size_t n_;
  std::vector<double> nodes_;
  Matrix table_;
};

/// Cardinal interpolation row [S_n(eta_1, x), ..., S_n(eta_n, x)].
RowVector s_vector(const ChebGrid& grid, double x);

/// s_vector for many abscissae at once; row i belongs to xs[i].
Matrix s_matrix(const ChebGrid& grid, std::span<const double> xs);

double interpolate_1d(const ChebGrid& grid, std::span<const double> fvals,
                      double x);

/// 1-based node indices of an n-point grid that coincide with the nodes of
/// the n / 3^levels point grid on the same interval.
IndexSet subsample_indices(std::size_t n, std::size_t levels);

/// Max of the Lebesgue function over `sample_count` equispaced points
/// (endpoints included).
double lebesgue_estimate(const ChebGrid& grid, std::size_t sample_count);

}  // namespace tuckercheb
