#include "doctest.h"
#include "support.hpp"

#include "tuckercheb/kernel_lowrank.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace tuckercheb;
using namespace testing_support;

namespace {

BoundingBox box2(double a, double b, double c, double d) {
  return BoundingBox({Interval(a, b), Interval(c, d)});
}

// Chebyshev form of K(X, Y) by explicit summation over every pair of grid
// multi-indices; no Khatri-Rao products or unfoldings involved.
Matrix naive_chebyshev_form(const Matrix& x, const Matrix& y,
                            const BoundingBox& sb, const BoundingBox& tb,
                            const KernelSpec& k, std::size_t n) {
  const std::size_t d = sb.dims();
  std::vector<ChebGrid> gs, gt;
  for (std::size_t j = 0; j < d; ++j) {
    gs.emplace_back(sb[j], n);
    gt.emplace_back(tb[j], n);
  }
  const Extents ext(d, n);
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= n;
  // Row weights w_i(a) = prod_j s_j(x_ij)[a_j].
  auto weights = [&](const Matrix& p, const std::vector<ChebGrid>& g) {
    Matrix w(p.rows(), Eigen::Index(total));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      std::vector<RowVector> s;
      for (std::size_t j = 0; j < d; ++j) s.push_back(s_vector(g[j], p(i, Eigen::Index(j))));
      for (std::size_t a = 0; a < total; ++a) {
        const auto ai = digits(a, ext);
        double v = 1.0;
        for (std::size_t j = 0; j < d; ++j) v *= s[j](Eigen::Index(ai[j]));
        w(i, Eigen::Index(a)) = v;
      }
    }
    return w;
  };
  Matrix m = Matrix::Zero(Eigen::Index(total), Eigen::Index(total));
  std::vector<double> u(d), v(d);
  for (std::size_t a = 0; a < total; ++a) {
    const auto ai = digits(a, ext);
    for (std::size_t b = 0; b < total; ++b) {
      const auto bi = digits(b, ext);
      for (std::size_t j = 0; j < d; ++j) {
        u[j] = gs[j].node(ai[j]);
        v[j] = gt[j].node(bi[j]);
      }
      m(Eigen::Index(a), Eigen::Index(b)) = k(u, v);
    }
  }
  return weights(x, gs) * m * weights(y, gt).transpose();
}

struct Fixture2D {
  BoundingBox sb = box2(0, 1, 0, 1);
  BoundingBox tb = box2(3, 4, 2.5, 3.5);
  Matrix x = uniform_points_in_box(sb, 40, 11, 1);
  Matrix y = uniform_points_in_box(tb, 30, 11, 2);
};

}  // namespace

TEST_CASE("geometry: diam, dist and admissibility") {
  const BoundingBox a = box2(0, 1, 0, 1);
  const BoundingBox b = box2(3, 4, 0, 2);
  CHECK(diam(a) == doctest::Approx(std::sqrt(2.0)));
  CHECK(diam(b) == doctest::Approx(std::sqrt(5.0)));
  CHECK(dist(a, a) == 0.0);
  CHECK(dist(a, b) == doctest::Approx(2.0));
  CHECK(dist(a, b) == dist(b, a));
  const BoundingBox c = box2(2, 3, 3, 4);
  CHECK(dist(a, c) == doctest::Approx(std::sqrt(5.0)));
  // Overlap means zero distance and never admissible.
  CHECK(dist(a, box2(0.5, 2, 0.5, 2)) == 0.0);
  CHECK_FALSE(is_strongly_admissible(a, box2(0.5, 2, 0.5, 2), 100.0));
  // Monotone in eta.
  bool prev = false;
  for (double eta : {0.1, 0.5, 1.0, 1.2, 2.0, 10.0}) {
    const bool now = is_strongly_admissible(a, b, eta);
    CHECK((!prev || now));
    prev = now;
  }
  CHECK(is_strongly_admissible(a, b, std::sqrt(5.0) / 2.0 + 1e-12));
  CHECK_FALSE(is_strongly_admissible(a, b, std::sqrt(5.0) / 2.0 - 1e-6));
  CHECK_THROWS_AS(BoundingBox({}), std::invalid_argument);
}

TEST_CASE("geometry: experiment boxes") {
  const double pi = std::acos(-1.0);
  auto [s2, t2] = experiment_boxes(5, 10, pi / 4, 2);
  CHECK(s2 == box2(0, 5, 0, 5));
  CHECK(t2[0].lo() == doctest::Approx(10 / std::sqrt(2.0)));
  CHECK(t2[1].lo() == doctest::Approx(10 / std::sqrt(2.0)));
  CHECK(t2[0].width() == doctest::Approx(5));
  auto [s3, t3] = experiment_boxes(5, 15, 0, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(s3[j].lo() == 0.0);
    CHECK(t3[j].lo() == doctest::Approx(15 / std::sqrt(3.0)));
  }
  CHECK(dist(s3, t3) > 0.0);
  CHECK_THROWS_AS(experiment_boxes(5, 10, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(experiment_boxes(0, 10, 0, 2), std::invalid_argument);
}

TEST_CASE("geometry: bounding box and uniform points") {
  const BoundingBox b = box2(-1, 2, 5, 6);
  const Matrix p = uniform_points_in_box(b, 200, 3, 0);
  CHECK(p.rows() == 200);
  CHECK(b.contains_all(p));
  const BoundingBox tight = bounding_box(p);
  CHECK(tight.contains_all(p));
  CHECK(tight[0].lo() >= -1.0);
  CHECK(tight[1].hi() <= 6.0);
  // Same seed and stream, same points; different stream, different points.
  CHECK(uniform_points_in_box(b, 200, 3, 0) == p);
  CHECK(uniform_points_in_box(b, 200, 3, 1) != p);
  Matrix flat(2, 2);
  flat << 1, 2, 1, 3;
  const BoundingBox fb = bounding_box(flat);
  CHECK(fb[0].width() > 0.0);
  CHECK(fb.contains_all(flat));
}

TEST_CASE("factors: rows are s-vectors and sum to one") {
  const BoundingBox b = box2(0, 2, -1, 1);
  const Matrix p = uniform_points_in_box(b, 25, 5, 0);
  std::vector<ChebGrid> g{ChebGrid(b[0], 7), ChebGrid(b[1], 7)};
  const auto f = build_factors(p, b, g);
  REQUIRE(f.size() == 2);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    CHECK(f[0].row(i).isApprox(s_vector(g[0], p(i, 0)), 1e-14));
    CHECK(f[1].row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const Matrix kr = khatri_rao_rows(f);
  CHECK(kr.rows() == 25);
  CHECK(kr.cols() == 49);
  for (Eigen::Index i = 0; i < kr.rows(); ++i) {
    CHECK(kr.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Mode 0 varies fastest: column a + 7 b holds f0(i,a) * f1(i,b).
    CHECK(kr(i, 3 + 7 * 5) == doctest::Approx(f[0](i, 3) * f[1](i, 5)));
  }
  CHECK(khatri_rao_rows(f, 0) == Matrix::Ones(25, 1));
  Matrix outside = p;
  outside(4, 1) = 1.5;
  CHECK_THROWS_AS(build_factors(outside, b, g), std::invalid_argument);
}

TEST_CASE("full-rank construction equals the explicit Chebyshev form") {
  Fixture2D fx;
  const KernelSpec k = KernelSpec::named("multiquadric", 0.7);
  const std::size_t n = 6;
  const Matrix oracle = naive_chebyshev_form(fx.x, fx.y, fx.sb, fx.tb, k, n);
  for (Method m : {Method::hosvd, Method::m1, Method::m2, Method::m3}) {
    CAPTURE(method_name(m));
    LowRankConfig cfg;
    cfg.n = n;
    cfg.method = m;
    cfg.rank = 4;
    cfg.oversample = 2;
    cfg.subsample_levels = 0;
    const LowRankKernel lrk = kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb, k, cfg);
    CHECK(lrk.rows() == 40);
    CHECK(lrk.cols() == 30);
    CHECK(max_norm_relative_error(oracle, to_dense(lrk)) < 1e-10);
  }
}

TEST_CASE("low-rank kernel approximates the dense kernel matrix") {
  Fixture2D fx;
  const Matrix k_dense =
      dense_kernel_matrix(fx.x, fx.y, KernelSpec::named("gaussian", 2.0));
  for (Method m : {Method::hosvd, Method::m1, Method::m2, Method::m3}) {
    CAPTURE(method_name(m));
    LowRankConfig cfg;
    cfg.n = 12;
    cfg.method = m;
    cfg.rank = 5;
    cfg.oversample = 3;
    cfg.subsample_levels = 1;
    const LowRankKernel lrk = kernel_lowrank(
        fx.x, fx.y, fx.sb, fx.tb, KernelSpec::named("gaussian", 2.0), cfg);
    CHECK(max_norm_relative_error(k_dense, lrk) < 1e-5);
    // Different entry points, same number.
    CHECK(max_norm_relative_error(k_dense, lrk) ==
          max_norm_relative_error(k_dense, to_dense(lrk)));
  }
}

TEST_CASE("apply matches the dense product and is linear") {
  Fixture2D fx;
  LowRankConfig cfg;
  cfg.n = 9;
  cfg.rank = 3;
  cfg.oversample = 2;
  const LowRankKernel lrk = kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb,
                                           KernelSpec::named("matern52"), cfg);
  const Matrix kd = to_dense(lrk);
  const Matrix vs = random_matrix(30, 2, 9);
  const Matrix ws = random_matrix(40, 1, 10);
  const Vector v = vs.col(0), u = vs.col(1), w = ws.col(0);
  const Vector kv = apply(lrk, v);
  CHECK((kv - kd * v).cwiseAbs().maxCoeff() < 1e-12 * kd.cwiseAbs().maxCoeff() * 30);
  const Vector ktw = transpose_apply(lrk, w);
  CHECK((ktw - kd.transpose() * w).cwiseAbs().maxCoeff() < 1e-11);
  // Adjointness.
  CHECK(w.dot(kv) == doctest::Approx(v.dot(ktw)).epsilon(1e-12));
  // Linearity.
  const Vector lhs = apply(lrk, Vector(2.5 * v - u));
  const Vector rhs = 2.5 * kv - apply(lrk, u);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(apply(lrk, Vector::Ones(31)), std::invalid_argument);
}

TEST_CASE("apply works in one and three dimensions") {
  for (std::size_t d : {1u, 3u}) {
    CAPTURE(d);
    auto [sb, tb] = experiment_boxes(1, 3, 0, d);
    const Matrix x = uniform_points_in_box(sb, 15, 2, 0);
    const Matrix y = uniform_points_in_box(tb, 12, 2, 1);
    LowRankConfig cfg;
    cfg.n = 6;
    cfg.rank = 2;
    cfg.oversample = 1;
    const LowRankKernel lrk =
        kernel_lowrank(x, y, sb, tb, KernelSpec::named("laplace3d"), cfg);
    const Vector v = random_matrix(12, 1, 3).col(0);
    CHECK((apply(lrk, v) - to_dense(lrk) * v).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(max_norm_relative_error(dense_kernel_matrix(x, y, lrk.kernel), lrk) < 1e-2);
  }
}

TEST_CASE("recompression: lossless at full rank, truncated otherwise") {
  Fixture2D fx;
  LowRankConfig cfg;
  cfg.n = 10;
  cfg.rank = 3;
  cfg.oversample = 1;
  const LowRankKernel lrk = kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb,
                                           KernelSpec::named("laplace2d"), cfg);
  const Matrix kd = to_dense(lrk);
  const SvdKernel full = recompress(lrk, 16);
  CHECK(max_norm_relative_error(kd, to_dense(full)) < 1e-10);
  for (Eigen::Index i = 0; i < full.s.size(); ++i) {
    CHECK(full.s(i) >= 0.0);
    if (i > 0) CHECK(full.s(i) <= full.s(i - 1));
  }
  // Orthonormal factors.
  CHECK((full.u.transpose() * full.u - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-10);
  const SvdKernel r4 = recompress(lrk, 4);
  CHECK(r4.u.cols() == 4);
  // Truncation error is the next singular value in the 2-norm.
  const Eigen::JacobiSVD<Matrix> svd(kd - to_dense(r4));
  CHECK(svd.singularValues()(0) == doctest::Approx(full.s(4)).epsilon(1e-6));
  const Vector v = random_matrix(30, 1, 4).col(0);
  CHECK((apply(r4, v) - to_dense(r4) * v).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(recompress(lrk, 17), std::invalid_argument);
  CHECK_THROWS_AS(recompress(lrk, 0), std::invalid_argument);
}

TEST_CASE("randomized SVD baseline approximates the Chebyshev form") {
  Fixture2D fx;
  const KernelSpec k = KernelSpec::named("gaussian", 1.5);
  const Matrix oracle = naive_chebyshev_form(fx.x, fx.y, fx.sb, fx.tb, k, 5);
  const SvdKernel s = chebyshev_randsvd(fx.x, fx.y, fx.sb, fx.tb, k, 5, 6, 5, 1);
  CHECK(s.u.cols() == 6);
  CHECK(max_norm_relative_error(oracle, to_dense(s)) < 1e-4);
  const SvdKernel again = chebyshev_randsvd(fx.x, fx.y, fx.sb, fx.tb, k, 5, 6, 5, 1);
  CHECK(again.u == s.u);
}

TEST_CASE("cross reproduction at selected grid nodes") {
  const BoundingBox sb = box2(0, 1, 0, 1), tb = box2(2.5, 3.5, 1, 2);
  const KernelSpec k = KernelSpec::named("laplace3d");
  const std::size_t n = 9;
  const Matrix dummy_x = uniform_points_in_box(sb, 3, 0, 0);
  const Matrix dummy_y = uniform_points_in_box(tb, 3, 0, 1);
  for (Method m : {Method::m1, Method::m2, Method::m3}) {
    CAPTURE(method_name(m));
    LowRankConfig cfg;
    cfg.n = n;
    cfg.method = m;
    cfg.rank = 3;
    cfg.oversample = 1;
    const LowRankKernel base = kernel_lowrank(dummy_x, dummy_y, sb, tb, k, cfg);
    REQUIRE(base.tucker.selected.has_value());
    const auto& sel = *base.tucker.selected;
    // Points placed on the selected nodes of each mode.
    auto cross_points = [&](const BoundingBox& b, std::size_t first) {
      const ChebGrid g0(b[0], n), g1(b[1], n);
      const auto& j0 = sel[first];
      const auto& j1 = sel[first + 1];
      Matrix p(Eigen::Index(j0.size() * j1.size()), 2);
      Eigen::Index row = 0;
      for (std::size_t b1 = 0; b1 < j1.size(); ++b1)
        for (std::size_t a0 = 0; a0 < j0.size(); ++a0, ++row) {
          p(row, 0) = g0.node(j0.offset(a0));
          p(row, 1) = g1.node(j1.offset(b1));
        }
      return p;
    };
    const Matrix x = cross_points(sb, 0), y = cross_points(tb, 2);
    const LowRankKernel lrk = kernel_lowrank(x, y, sb, tb, k, cfg);
    const Matrix exact = dense_kernel_matrix(x, y, k);
    CHECK(max_norm_relative_error(exact, lrk) < 1e-9);
  }
}

TEST_CASE("method 2 evaluation count on a 2-D block") {
  auto [sb, tb] = experiment_boxes(5, 10, std::acos(-1.0) / 4, 2);
  const Matrix x = uniform_points_in_box(sb, 20, 0, 0);
  const Matrix y = uniform_points_in_box(tb, 20, 0, 1);
  LowRankConfig cfg;
  cfg.n = 27;
  cfg.method = Method::m2;
  cfg.rank = 5;
  cfg.oversample = 5;
  cfg.subsample_levels = 1;
  const LowRankKernel lrk =
      kernel_lowrank(x, y, sb, tb, KernelSpec::named("gaussian"), cfg);
  // Oracle: union of the sampled fibers of every mode and the core cross.
  const IndexSet s = method2_sample_set(27, 1, cfg.sample_rule);
  const auto sz = s.zero_based();
  const std::set<std::size_t> sample(sz.begin(), sz.end());
  const auto& sel = *lrk.tucker.selected;
  std::vector<std::set<std::size_t>> cross;
  for (const auto& j : sel) {
    const auto z = j.zero_based();
    cross.emplace_back(z.begin(), z.end());
  }
  const Extents ext(4, 27);
  std::uint64_t expected = 0;
  for (std::size_t lin = 0; lin < 531441; ++lin) {
    const auto idx = digits(lin, ext);
    bool hit = true;
    for (std::size_t k = 0; k < 4; ++k) hit = hit && cross[k].count(idx[k]);
    for (std::size_t mode = 0; mode < 4 && !hit; ++mode) {
      bool fiber = true;
      for (std::size_t k = 0; k < 4; ++k)
        if (k != mode) fiber = fiber && sample.count(idx[k]);
      hit = fiber;
    }
    expected += hit ? 1 : 0;
  }
  CHECK(lrk.kernel_evals == expected);
  CHECK(lrk.kernel_evals <= 4u * 27u * 729u + 10000u);
  CHECK(double(lrk.kernel_evals) < 0.17 * 531441.0);
}

TEST_CASE("singular kernels need separated boxes") {
  const BoundingBox a = box2(0, 1, 0, 1), b = box2(1, 2, 0, 1);
  const Matrix x = uniform_points_in_box(a, 5, 0, 0);
  const Matrix y = uniform_points_in_box(b, 5, 0, 1);
  LowRankConfig cfg;
  cfg.n = 6;
  cfg.rank = 2;
  cfg.oversample = 1;
  for (const char* name : {"laplace3d", "biharmonic", "laplace2d", "thinplate"}) {
    CAPTURE(name);
    try {
      kernel_lowrank(x, y, a, b, KernelSpec::named(name), cfg);
      FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("diam") != std::string::npos);
      CHECK(msg.find("dist") != std::string::npos);
    }
    CHECK_THROWS_AS(symmetric_lowrank(x, a, KernelSpec::named(name), cfg),
                    std::invalid_argument);
  }
  // Smooth kernels are fine on touching boxes.
  CHECK_NOTHROW(kernel_lowrank(x, y, a, b, KernelSpec::named("gaussian"), cfg));
}

TEST_CASE("configuration errors") {
  Fixture2D fx;
  const KernelSpec k = KernelSpec::named("gaussian");
  LowRankConfig cfg;
  cfg.n = 6;
  cfg.rank = 5;
  cfg.oversample = 2;
  CHECK_THROWS_AS(kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb, k, cfg), std::invalid_argument);
  cfg.rank = 0;
  CHECK_THROWS_AS(kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb, k, cfg), std::invalid_argument);
  cfg.rank = 2;
  // Points outside their box.
  CHECK_THROWS_AS(kernel_lowrank(fx.y, fx.x, fx.sb, fx.tb, k, cfg), std::invalid_argument);
  // Dense methods refuse coefficient tensors above the memory budget.
  auto [sb, tb] = experiment_boxes(1, 3, 0, 3);
  const Matrix x3 = uniform_points_in_box(sb, 4, 0, 0);
  const Matrix y3 = uniform_points_in_box(tb, 4, 0, 1);
  LowRankConfig big;
  big.n = 24;
  big.method = Method::m1;
  big.rank = 2;
  big.oversample = 0;
  try {
    kernel_lowrank(x3, y3, sb, tb, k, big);
    FAIL("expected the memory guard");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("m2") != std::string::npos);
  }
}

TEST_CASE("symmetric construction: shared factors and symmetry") {
  const BoundingBox b = box2(0, 3, -1, 1);
  const Matrix x = uniform_points_in_box(b, 100, 21, 0);
  KernelSpec k = KernelSpec::named("gaussian");
  k.scales = {2.0, 1.5};
  for (Method m : {Method::hosvd, Method::m1, Method::m2, Method::m3}) {
    CAPTURE(method_name(m));
    LowRankConfig cfg;
    cfg.n = 12;
    cfg.method = m;
    cfg.rank = 4;
    cfg.oversample = 2;
    cfg.subsample_levels = 1;
    const LowRankKernel lrk = symmetric_lowrank(x, b, k, cfg);
    CHECK(lrk.symmetric);
    REQUIRE(lrk.tucker.factors.size() == 4);
    CHECK(lrk.tucker.factors[2] == lrk.tucker.factors[0]);
    CHECK(lrk.tucker.factors[3] == lrk.tucker.factors[1]);
    const Matrix kd = to_dense(lrk);
    CHECK((kd - kd.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    const Matrix exact = dense_kernel_matrix(x, x, k);
    // Method 2 sees only 4 fibers per mode here.
    CHECK(max_norm_relative_error(exact, kd) < (m == Method::m2 ? 1e-2 : 1e-4));
    // Trace from diagonals against the dense oracle.
    const double tr = exact.trace();
    CHECK(tr == doctest::Approx(100.0));
    const double oracle = std::abs(tr - kd.trace()) / tr;
    CHECK(trace_relative_error(x, k, lrk) == doctest::Approx(oracle).epsilon(1e-6).scale(1e-14));
  }
}

TEST_CASE("symmetric construction: trace error vanishes without compression") {
  const BoundingBox b = box2(0, 1, 0, 1);
  const Matrix x = uniform_points_in_box(b, 300, 4, 0);
  const KernelSpec k = KernelSpec::named("gaussian", 1.0);
  LowRankConfig cfg;
  cfg.n = 14;
  cfg.method = Method::hosvd;
  cfg.rank = 14;
  cfg.oversample = 0;
  const LowRankKernel lrk = symmetric_lowrank(x, b, k, cfg);
  CHECK(trace_relative_error(x, k, lrk) <= 1e-10);
  LowRankConfig nonsym = cfg;
  const LowRankKernel ns = kernel_lowrank(x, x, b, b, k, nonsym);
  CHECK_THROWS_AS(trace_relative_error(x, k, ns), std::invalid_argument);
}

TEST_CASE("symmetric streaming matches the dense Tucker routines") {
  const BoundingBox b = box2(0, 2, 0, 1);
  const Matrix x = uniform_points_in_box(b, 10, 1, 0);
  const KernelSpec k = KernelSpec::named("matern52", 1.3);
  const std::size_t n = 7;
  // Dense order-4 coefficient tensor, built here by direct loops.
  const ChebGrid g0(b[0], n), g1(b[1], n);
  DenseTensor m(Extents(4, n));
  for (std::size_t lin = 0; lin < m.size(); ++lin) {
    const auto i = digits(lin, m.extents());
    const std::vector<double> u{g0.node(i[0]), g1.node(i[1])};
    const std::vector<double> v{g0.node(i[2]), g1.node(i[3])};
    m[lin] = k(u, v);
  }
  LowRankConfig cfg;
  cfg.n = n;
  cfg.rank = 3;
  cfg.oversample = 2;
  cfg.seed = 17;

  cfg.method = Method::m1;
  const LowRankKernel s1 = symmetric_lowrank(x, b, k, cfg);
  for (std::size_t j = 0; j < 2; ++j) {
    const ModeFactorResult r = method1_factor(m, j, 3, 2, 17);
    CHECK((s1.tucker.factors[j] - r.factor).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((*s1.tucker.selected)[j] == r.selected);
  }

  cfg.method = Method::m3;
  const LowRankKernel s3 = symmetric_lowrank(x, b, k, cfg);
  const Method3Sketch sk(m.extents(), 3, 2, 17);
  CHECK(s3.tucker.rng_draws == sk.rng_draws());
  for (std::size_t j = 0; j < 2; ++j) {
    const ModeFactorResult r = sk.factor(m, j);
    CHECK((s3.tucker.factors[j] - r.factor).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((*s3.tucker.selected)[j] == r.selected);
  }

  cfg.method = Method::hosvd;
  const LowRankKernel sh = symmetric_lowrank(x, b, k, cfg);
  for (std::size_t j = 0; j < 2; ++j) {
    // Same leading subspace as the SVD of the explicit unfolding.
    const Matrix u = Eigen::JacobiSVD<Matrix>(unfold(m, j), Eigen::ComputeThinU)
                         .matrixU()
                         .leftCols(5);
    const Matrix& a = sh.tucker.factors[j];
    CHECK((a * a.transpose() - u * u.transpose()).cwiseAbs().maxCoeff() < 1e-8);
  }
  // Core is M projected on every mode.
  std::vector<ModeFactor> proj;
  for (std::size_t j = 0; j < 4; ++j) proj.push_back({sh.tucker.factors[j].transpose(), j});
  const DenseTensor core = multi_mode_product(m, proj);
  CHECK(frobenius_distance(core, sh.tucker.core) < 1e-10 * m.norm());
}

TEST_CASE("points CSV round trip and parsing errors") {
  const Matrix p = uniform_points_in_box(box2(-3, 2, 1e-3, 5e5), 17, 8, 0);
  std::stringstream ss;
  write_points_csv(ss, p);
  const Matrix back = read_points_csv(ss);
  CHECK(back == p);
  std::istringstream with_header("# cloud\nx,y\n1, 2\n\n3,4\n");
  const Matrix h = read_points_csv(with_header);
  CHECK(h.rows() == 2);
  CHECK(h(1, 0) == 3.0);
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(read_points_csv(ragged), std::invalid_argument);
  std::istringstream junk("1,2\n3,abc\n");
  CHECK_THROWS_AS(read_points_csv(junk), std::invalid_argument);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(read_points_csv(empty), std::invalid_argument);
  std::istringstream inf("1,inf\n");
  CHECK_THROWS_AS(read_points_csv(inf), std::invalid_argument);
}

TEST_CASE("low-rank container round trip is bit-exact") {
  Fixture2D fx;
  KernelSpec k = KernelSpec::named("matern32", 1.7);
  for (Method m : {Method::hosvd, Method::m2}) {
    LowRankConfig cfg;
    cfg.n = 9;
    cfg.method = m;
    cfg.rank = 3;
    cfg.oversample = 1;
    cfg.seed = 99;
    const LowRankKernel lrk = kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb, k, cfg);
    std::stringstream a;
    write_lowrank(a, lrk);
    const std::string text = a.str();
    const LowRankKernel back = read_lowrank(a);
    std::stringstream b;
    write_lowrank(b, back);
    CHECK(b.str() == text);
    CHECK(back.kernel_evals == lrk.kernel_evals);
    CHECK(back.config.seed == 99);
    const Vector v = random_matrix(30, 1, 2).col(0);
    CHECK(apply(back, v) == apply(lrk, v));
  }
  std::istringstream bad("tuckercheb-lowrank 2\n");
  CHECK_THROWS(read_lowrank(bad));
}

TEST_CASE("construction is deterministic for a fixed seed") {
  Fixture2D fx;
  for (Method m : {Method::m1, Method::m2, Method::m3}) {
    LowRankConfig cfg;
    cfg.n = 9;
    cfg.method = m;
    cfg.rank = 3;
    cfg.oversample = 2;
    cfg.seed = 5;
    const KernelSpec k = KernelSpec::named("multiquadric");
    std::stringstream a, b;
    write_lowrank(a, kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb, k, cfg));
    write_lowrank(b, kernel_lowrank(fx.x, fx.y, fx.sb, fx.tb, k, cfg));
    CHECK(a.str() == b.str());
  }
}
