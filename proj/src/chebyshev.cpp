#include "tuckercheb/chebyshev.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tuckercheb {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("Interval: need finite lo < hi, got [" +
                                std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  }
}

double affine_map(const Interval& iv, double x) {
  return (x + 1.0) * (iv.width() / 2.0) + iv.lo();
}

double inverse_map(const Interval& iv, double x) {
  return 2.0 * (x - iv.lo()) / iv.width() - 1.0;
}

std::vector<double> cheb_nodes(std::size_t n) {
  if (n == 0) throw std::invalid_argument("cheb_nodes: n must be positive");
  std::vector<double> xi(n);
  for (std::size_t k = 1; k <= n; ++k) {
    xi[k - 1] = std::cos(double(2 * k - 1) * std::numbers::pi / double(2 * n));
  }
  return xi;
}

ChebGrid::ChebGrid(Interval interval, std::size_t n)
    : interval_(interval), n_(n) {
  const auto ref = cheb_nodes(n);
  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) nodes_[i] = affine_map(interval_, ref[i]);
  // T_k(xi_i) = cos(k (2i-1) pi / 2n); evaluated from the angle directly.
  const auto N = static_cast<Eigen::Index>(n);
  table_.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index k = 0; k < N; ++k) {
      table_(i, k) = std::cos(double(k) * double(2 * i + 1) *
                              std::numbers::pi / double(2 * n));
    }
  }
}

RowVector ChebGrid::weighted_chebyshev(double x) const {
  const auto N = static_cast<Eigen::Index>(n_);
  RowVector w(N);
  const double u = inverse_map(interval_, x);
  double t_prev = 1.0, t_cur = u;
  w(0) = 1.0;
  for (Eigen::Index k = 1; k < N; ++k) {
    w(k) = 2.0 * t_cur;
    const double t_next = 2.0 * u * t_cur - t_prev;
    t_prev = t_cur;
    t_cur = t_next;
  }
  return w;
}

RowVector s_vector(const ChebGrid& grid, double x) {
  return (grid.weighted_chebyshev(x) * grid.node_table().transpose()) /
         double(grid.size());
}

Matrix s_matrix(const ChebGrid& grid, std::span<const double> xs) {
  const auto N = static_cast<Eigen::Index>(grid.size());
  Matrix w(static_cast<Eigen::Index>(xs.size()), N);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    w.row(static_cast<Eigen::Index>(i)) = grid.weighted_chebyshev(xs[i]);
  }
  Matrix s = w * grid.node_table().transpose();
  s /= double(grid.size());
  return s;
}

double interpolate_1d(const ChebGrid& grid, std::span<const double> fvals,
                      double x) {
  if (fvals.size() != grid.size()) {
    throw std::invalid_argument("interpolate_1d: expected " +
                                std::to_string(grid.size()) +
                                " values, got " + std::to_string(fvals.size()));
  }
  const RowVector s = s_vector(grid, x);
  double acc = 0.0;
  for (std::size_t k = 0; k < fvals.size(); ++k) {
    acc += fvals[k] * s(static_cast<Eigen::Index>(k));
  }
  return acc;
}

IndexSet subsample_indices(std::size_t n, std::size_t levels) {
  if (levels < 1) {
    throw std::invalid_argument("subsample_indices: levels must be >= 1");
  }
  std::size_t step = 1;
  for (std::size_t l = 0; l < levels; ++l) step *= 3;
  if (n == 0 || n % step != 0) {
    throw std::invalid_argument("subsample_indices: n = " + std::to_string(n) +
                                " is not divisible by 3^" +
                                std::to_string(levels));
  }
  // eta_k^(m) == eta_{3k-1}^(3m); applied `levels` times.
  const std::size_t offset = (step - 1) / 2;
  std::vector<std::size_t> idx(n / step);
  for (std::size_t k = 1; k <= idx.size(); ++k) idx[k - 1] = step * k - offset;
  return IndexSet(std::move(idx), n);
}

double lebesgue_estimate(const ChebGrid& grid, std::size_t sample_count) {
  if (sample_count < 2) {
    throw std::invalid_argument("lebesgue_estimate: need at least 2 samples");
  }
  const Interval& iv = grid.interval();
  double best = 0.0;
  for (std::size_t m = 0; m < sample_count; ++m) {
    const double x =
        iv.lo() + iv.width() * double(m) / double(sample_count - 1);
    best = std::max(best, s_vector(grid, x).cwiseAbs().sum());
  }
  return best;
}

}  // namespace tuckercheb
