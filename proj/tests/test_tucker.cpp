#include "doctest.h"
#include "support.hpp"

#include "tuckercheb/chebyshev.hpp"
#include "tuckercheb/tucker.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace tuckercheb;
using namespace testing_support;

namespace {

double cross_mismatch(const DenseTensor& t, const TuckerTensor& tk) {
  const DenseTensor rec = reconstruct(tk);
  const DenseTensor a = subtensor(t, *tk.selected);
  const DenseTensor b = subtensor(rec, *tk.selected);
  return frobenius_distance(a, b) / std::max(a.norm(), 1e-300);
}

double identity_mismatch(const TuckerTensor& tk) {
  double worst = 0.0;
  for (std::size_t j = 0; j < tk.order(); ++j) {
    const IndexSet& s = (*tk.selected)[j];
    Matrix rows(Eigen::Index(s.size()), tk.factors[j].cols());
    for (std::size_t k = 0; k < s.size(); ++k)
      rows.row(Eigen::Index(k)) = tk.factors[j].row(Eigen::Index(s.offset(k)));
    worst = std::max(worst,
                     max_abs(rows - Matrix::Identity(rows.rows(), rows.cols())));
  }
  return worst;
}

// Sum of squared singular values of unfold(t, j) beyond `r`, from the
// eigenvalues of the Gram matrix.
double svd_tail(const DenseTensor& t, std::size_t mode, std::size_t r) {
  const Matrix m = unfold(t, mode);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose());
  const Eigen::Index n = m.rows();
  return eig.eigenvalues().head(n - Eigen::Index(r)).sum();
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (Method m : {Method::hosvd, Method::m1, Method::m2, Method::m3})
    CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS(parse_method("m4"));
}

TEST_CASE("reconstruct with identity factors returns the core") {
  const DenseTensor t = random_tensor({3, 4, 2}, 1);
  TuckerTensor tk;
  tk.core = t;
  for (std::size_t e : t.extents())
    tk.factors.push_back(Matrix::Identity(Eigen::Index(e), Eigen::Index(e)));
  CHECK(frobenius_distance(reconstruct(tk), t) == 0.0);
  CHECK(relative_error(t, tk) == 0.0);
  tk.core = DenseTensor(t.extents());
  CHECK(relative_error(t, tk) == doctest::Approx(1.0));
  CHECK_THROWS(relative_error(DenseTensor({2, 2}), tk));
}

TEST_CASE("reconstruct matches naive summation") {
  const DenseTensor core = random_tensor({2, 3, 2}, 2);
  const std::vector<Matrix> f{random_matrix(4, 2, 3), random_matrix(5, 3, 4),
                              random_matrix(3, 2, 5)};
  TuckerTensor tk{core, f, std::nullopt, 0};
  const DenseTensor ref = naive_tucker(core, f);
  CHECK(frobenius_distance(reconstruct(tk), ref) <= 1e-12 * ref.norm());
  tk.factors.pop_back();
  CHECK_THROWS(tk.validate());
}

TEST_CASE("HOSVD: exact rank, full rank, quasi-optimality") {
  const DenseTensor low = low_rank_tensor({8, 7, 6}, 2, 6);
  CHECK(relative_error(low, hosvd(low, 2)) <= 1e-12);

  const DenseTensor t = random_tensor({5, 4, 6}, 7);
  const std::vector<std::size_t> full{5, 4, 6};
  CHECK(relative_error(t, hosvd(t, full)) <= 1e-12);

  const DenseTensor r10 = random_tensor({10, 10, 10}, 8);
  const TuckerTensor tk = hosvd(r10, 5);
  CHECK(!tk.selected);
  const double err2 = std::pow(frobenius_distance(r10, reconstruct(tk)), 2);
  double tails = 0.0;
  for (std::size_t j = 0; j < 3; ++j) tails += svd_tail(r10, j, 5);
  CHECK(err2 <= tails * (1 + 1e-10));
  CHECK_THROWS(hosvd(r10, 11));
}

TEST_CASE("wide unfoldings give the same singular values as the Gram route") {
  const DenseTensor t = random_tensor({6, 5, 7, 4}, 9);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto sv = mode_singular_values(t, j);
    const Matrix m = unfold(t, j);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose());
    const Eigen::Index n = m.rows();
    REQUIRE(sv.size() == std::size_t(n));
    for (Eigen::Index i = 0; i < n; ++i)
      CHECK(sv[std::size_t(i)] ==
            doctest::Approx(std::sqrt(eig.eigenvalues()(n - 1 - i))).epsilon(1e-10));
    const Matrix u = leading_left_singular_vectors(t, j, 3);
    CHECK(max_abs(u.transpose() * u - Matrix::Identity(3, 3)) <= 1e-12);
  }
}

TEST_CASE("interpolatory methods recover exact multirank tensors") {
  const DenseTensor t = low_rank_tensor({12, 10, 11}, 3, 10);
  DenseSource src(t);
  const std::vector<IndexSet> sets{IndexSet({1, 4, 7, 10}, 12),
                                   IndexSet({2, 5, 8}, 10),
                                   IndexSet({1, 4, 7, 10}, 11)};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TuckerTensor a = method1(t, 3, 2, seed);
    const TuckerTensor b = method2(src, 3, 2, sets, seed);
    const TuckerTensor c = method3(t, 3, 2, seed);
    for (const TuckerTensor* tk : {&a, &b, &c}) {
      CHECK(relative_error(t, *tk) <= 1e-10);
      CHECK(cross_mismatch(t, *tk) <= 1e-10);
      CHECK(identity_mismatch(*tk) <= 1e-12);
    }
  }
}

TEST_CASE("method2 with full sample sets equals method1 bit for bit") {
  const DenseTensor t = random_tensor({7, 6, 8}, 11);
  const TuckerTensor a = method1(t, 3, 2, 5);
  const std::vector<IndexSet> sets{IndexSet::full(7), IndexSet::full(6),
                                   IndexSet::full(8)};
  DenseSource src(t);
  const TuckerTensor b = method2(src, 3, 2, sets, 5);
  CHECK(a.core == b.core);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(a.factors[j] == b.factors[j]);
    CHECK((*a.selected)[j] == (*b.selected)[j]);
  }
  CHECK(a.rng_draws == b.rng_draws);
}

TEST_CASE("structure preservation on random tensors") {
  const std::vector<IndexSet> sets{IndexSet({2, 5, 8}, 9),
                                   IndexSet({1, 3, 5, 7}, 8),
                                   IndexSet({2, 5, 8}, 10)};
  for (std::uint32_t s = 0; s < 6; ++s) {
    const DenseTensor t = random_tensor({9, 8, 10}, 20 + s);
    DenseSource src(t);
    const TuckerTensor a = method1(t, 3, 2, s);
    const TuckerTensor b = method2(src, 3, 2, sets, s);
    const TuckerTensor c = method3(t, 3, 2, s);
    for (const TuckerTensor* tk : {&a, &b, &c}) {
      CHECK(cross_mismatch(t, *tk) <= 1e-9);
      CHECK(identity_mismatch(*tk) <= 1e-12);
    }
  }
}

TEST_CASE("method2 reads only sampled fibers and the core cross") {
  const DenseTensor t = random_tensor({27, 27, 27, 27}, 30);
  DenseSource dense(t);
  CountingSource counter(dense);
  const TuckerTensor tk = method2(counter, 5, 5, subsample_indices(27, 1), 3);
  CHECK(counter.distinct_reads() <= 4u * 27u * 729u + 10000u);
  CHECK(tk.rng_draws == 4u * 729u * 10u);
  CHECK(cross_mismatch(t, tk) <= 1e-9);
}

TEST_CASE("random draw counts") {
  const DenseTensor t = random_tensor({36, 36, 36}, 31);
  CHECK(method3(t, 5, 5, 1).rng_draws == 2u * 36u * 10u);
  CHECK(method1(t, 5, 5, 1).rng_draws == 3u * 36u * 36u * 10u);
}

TEST_CASE("rank constraints are enforced") {
  const DenseTensor t = random_tensor({4, 5, 6}, 32);
  CHECK_THROWS_AS(method1(t, 3, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(method3(t, 0, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(method3(DenseTensor({5}), 1, 0, 0), std::invalid_argument);
  DenseSource src(t);
  CHECK_THROWS_AS(method2(src, 2, 0, IndexSet::full(4), 0), std::invalid_argument);
  const std::vector<IndexSet> tiny{IndexSet({1}, 4), IndexSet({1}, 5),
                                   IndexSet({1}, 6)};
  CHECK_THROWS_AS(method2(src, 2, 0, tiny, 0), std::invalid_argument);
}

TEST_CASE("Method 1 mean error respects the expected-error bound") {
  // Rank-3 signal plus small noise; bound uses the true mode spectra.
  const DenseTensor base = low_rank_tensor({15, 15, 15}, 3, 40);
  const DenseTensor noise = random_tensor({15, 15, 15}, 41);
  DenseTensor t(base.extents());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = base[i] + 1e-3 * noise[i];
  std::vector<std::vector<double>> sv;
  for (std::size_t j = 0; j < 3; ++j) sv.push_back(mode_singular_values(t, j));
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    mean += frobenius_distance(t, reconstruct(method1(t, 3, 2, seed))) / 20;
  CHECK(mean <= theorem1_bound(sv, 3, 2, 15));
}
