#include "tuckercheb/rand_linalg.hpp"

#include "tuckercheb/random.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace tuckercheb {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                       std::uint64_t seed, std::uint64_t stream) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("gaussian_matrix: dimensions must be positive");
  }
  return NormalStream(seed, stream).matrix(rows, cols);
}

Matrix orthonormal_basis(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

Matrix range_finder(const Matrix& x, const SketchConfig& cfg) {
  const std::size_t ell = cfg.sketch_size();
  const auto limit = static_cast<std::size_t>(std::min(x.rows(), x.cols()));
  if (ell < 1 || ell > limit) {
    throw std::invalid_argument("range_finder: sketch size " +
                                std::to_string(ell) + " exceeds min(m,n) = " +
                                std::to_string(limit));
  }
  const Matrix omega = gaussian_matrix(x.cols(), static_cast<Eigen::Index>(ell),
                                       cfg.seed, cfg.stream);
  return orthonormal_basis(x * omega);
}

IndexSet pivot_select(const Matrix& qt, std::size_t count) {
  const Eigen::Index rows = qt.rows(), cols = qt.cols();
  if (count > static_cast<std::size_t>(std::min(rows, cols))) {
    throw std::invalid_argument("pivot_select: cannot select " +
                                std::to_string(count) + " columns from a " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols) + " matrix");
  }
  Matrix work = qt;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < cols; ++j) perm[std::size_t(j)] = j;

  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(count); ++k) {
    // Trailing column norms are recomputed rather than downdated.
    Eigen::Index best = k;
    double best_norm = -1.0;
    for (Eigen::Index j = k; j < cols; ++j) {
      const double nrm = work.col(j).tail(rows - k).squaredNorm();
      if (nrm > best_norm) {
        best_norm = nrm;
        best = j;
      }
    }
    if (best != k) {
      work.col(k).swap(work.col(best));
      std::swap(perm[std::size_t(k)], perm[std::size_t(best)]);
    }
    if (k + 1 < rows) {
      Vector essential;
      double tau = 0.0, beta = 0.0;
      auto head = work.col(k).tail(rows - k);
      head.makeHouseholderInPlace(tau, beta);
      essential = head.tail(rows - k - 1);
      work(k, k) = beta;
      work.col(k).tail(rows - k - 1).setZero();
      if (k + 1 < cols) {
        Vector scratch(cols - k - 1);
        work.bottomRightCorner(rows - k, cols - k - 1)
            .applyHouseholderOnTheLeft(essential, tau, scratch.data());
      }
    }
  }
  std::vector<std::size_t> chosen(count);
  for (std::size_t k = 0; k < count; ++k) {
    chosen[k] = static_cast<std::size_t>(perm[k]);
  }
  return IndexSet::from_zero_based(chosen, static_cast<std::size_t>(cols));
}

RridResult interpolatory_rows(const Matrix& sketch) {
  return interpolatory_from_basis(orthonormal_basis(sketch));
}

RridResult interpolatory_from_basis(const Matrix& q) {
  const Eigen::Index ell = q.cols();
  IndexSet sel = pivot_select(q.transpose(), static_cast<std::size_t>(ell));

  Matrix q_sel(ell, ell);
  for (Eigen::Index k = 0; k < ell; ++k) {
    q_sel.row(k) = q.row(static_cast<Eigen::Index>(sel.offset(std::size_t(k))));
  }
  // F = Q * Q(J,:)^{-1}  <=>  Q(J,:)^T F^T = Q^T.
  Eigen::PartialPivLU<Matrix> lu(q_sel.transpose());
  const double rcond = lu.rcond();
  if (!(rcond > 64 * std::numeric_limits<double>::epsilon())) {
    throw NumericalError("rrid: selected rows are numerically singular (rcond " +
                         std::to_string(rcond) + ")");
  }
  Matrix f = lu.solve(q.transpose()).transpose();
  return {std::move(f), std::move(sel), 0};
}

RridResult rrid(const Matrix& x, const SketchConfig& cfg) {
  const std::size_t ell = cfg.sketch_size();
  const auto limit = static_cast<std::size_t>(std::min(x.rows(), x.cols()));
  if (ell < 1 || ell > limit) {
    throw std::invalid_argument("rrid: sketch size " + std::to_string(ell) +
                                " exceeds min(m,n) = " + std::to_string(limit));
  }
  const Matrix omega = gaussian_matrix(x.cols(), static_cast<Eigen::Index>(ell),
                                       cfg.seed, cfg.stream);
  RridResult res = interpolatory_rows(x * omega);
  res.rng_draws = static_cast<std::uint64_t>(omega.size());
  return res;
}

SvdFactors truncated_svd(const Matrix& b, std::size_t rank) {
  const auto limit = static_cast<std::size_t>(std::min(b.rows(), b.cols()));
  if (rank < 1 || rank > limit) {
    throw std::invalid_argument("truncated_svd: rank " + std::to_string(rank) +
                                " not in [1, " + std::to_string(limit) + "]");
  }
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto r = static_cast<Eigen::Index>(rank);
  return {svd.matrixU().leftCols(r), svd.singularValues().head(r),
          svd.matrixV().leftCols(r)};
}

SvdFactors randomized_svd(const Matrix& a, std::size_t rank,
                          std::size_t oversample, std::uint64_t seed) {
  const auto limit = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
  const std::size_t ell = std::min(rank + oversample, limit);
  if (rank < 1 || rank > ell) {
    throw std::invalid_argument("randomized_svd: rank too large");
  }
  const Matrix omega =
      gaussian_matrix(a.cols(), static_cast<Eigen::Index>(ell), seed);
  const Matrix q = orthonormal_basis(a * omega);
  const Matrix b = q.transpose() * a;
  SvdFactors small = truncated_svd(b, rank);
  return {q * small.u, std::move(small.s), std::move(small.v)};
}

double theorem1_bound(const std::vector<std::vector<double>>& mode_singular_values,
                      std::size_t rank, std::size_t oversample, std::size_t n) {
  if (oversample < 2) {
    throw std::invalid_argument("theorem1_bound: oversampling must be >= 2");
  }
  const std::size_t ell = rank + oversample;
  if (ell >= n) {
    throw std::invalid_argument("theorem1_bound: need r + p < n");
  }
  const double g = std::sqrt(1.0 + 4.0 * double(ell) * double(n - ell));
  const double inflate = 1.0 + double(rank) / double(oversample - 1);
  double total = 0.0;
  double gpow = 1.0;
  for (const auto& sv : mode_singular_values) {
    gpow *= g;
    double tail = 0.0;
    for (std::size_t i = rank; i < sv.size(); ++i) tail += sv[i] * sv[i];
    total += gpow * std::sqrt(inflate * tail);
  }
  return total;
}

}  // namespace tuckercheb
