#include "tuckercheb/experiments.hpp"

#include "tuckercheb/rand_linalg.hpp"
#include "tuckercheb/random.hpp"
#include "tuckercheb/test_functions.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

namespace tuckercheb::experiments {
namespace {

// Each check returns the measured quantity and its tolerance.
struct Measure {
  double value;
  double tol;
};

std::string describe_measure(const Measure& m) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.3e (tol %.1e)", m.value, m.tol);
  return buf;
}

Measure philox_known_answers() {
  const Philox4x32 a(Philox4x32::Key{0, 0});
  const Philox4x32 b(Philox4x32::Key{0xffffffff, 0xffffffff});
  const Philox4x32 c(Philox4x32::Key{0xa4093822, 0x299f31d0});
  const bool ok =
      a({0, 0, 0, 0}) == Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8} &&
      b({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
          Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd} &&
      c({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
          Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1};
  return {ok ? 0.0 : 1.0, 0.0};
}

Measure stream_random_access() {
  const NormalStream s(11, 3);
  const Matrix m = s.matrix(7, 5, 40);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      worst = std::max(worst, std::abs(m(i, j) - s.at(40 + static_cast<std::uint64_t>(j * 7 + i))));
  return {worst, 0.0};
}

Measure cardinality() {
  double worst = 0.0;
  for (std::size_t n : {5, 9, 16, 27}) {
    const ChebGrid g({-2.0, 3.0}, n);
    for (std::size_t i = 0; i < n; ++i) {
      const RowVector s = s_vector(g, g.node(i));
      for (std::size_t k = 0; k < n; ++k)
        worst = std::max(worst, std::abs(s(static_cast<Eigen::Index>(k)) - (i == k ? 1.0 : 0.0)));
    }
  }
  return {worst, 1e-12};
}

Measure partition_of_unity() {
  double worst = 0.0;
  const UniformStream u(5, 0);
  for (std::size_t n : {4, 12, 36}) {
    const ChebGrid g({0.0, 1.0}, n);
    for (std::uint64_t k = 0; k < 50; ++k)
      worst = std::max(worst, std::abs(s_vector(g, u.at(k)).sum() - 1.0));
  }
  return {worst, 1e-13};
}

Measure polynomial_reproduction() {
  // p(x) = sum_k c_k x^k of degree n-1 is reproduced exactly.
  const std::size_t n = 12;
  const ChebGrid g({-1.0, 2.0}, n);
  const NormalStream coef(2, 0);
  const auto p = [&](double x) {
    double v = 0.0;
    for (std::size_t k = n; k-- > 0;) v = v * x + coef.at(k);
    return v;
  };
  std::vector<double> fv(n);
  for (std::size_t i = 0; i < n; ++i) fv[i] = p(g.node(i));
  const UniformStream u(3, 0);
  double worst = 0.0, scale = 0.0;
  for (std::uint64_t k = 0; k < 40; ++k) {
    const double x = -1.0 + 3.0 * u.at(k);
    worst = std::max(worst, std::abs(interpolate_1d(g, fv, x) - p(x)));
    scale = std::max(scale, std::abs(p(x)));
  }
  return {worst / scale, 1e-12};
}

Measure nested_nodes() {
  double worst = 0.0;
  for (auto [n, levels] : {std::pair<std::size_t, std::size_t>{27, 1}, {27, 2}, {36, 2}}) {
    std::size_t coarse_n = n;
    for (std::size_t l = 0; l < levels; ++l) coarse_n /= 3;
    const ChebGrid fine({-1.0, 1.0}, n), coarse({-1.0, 1.0}, coarse_n);
    const IndexSet set = subsample_indices(n, levels);
    for (std::size_t k = 0; k < set.size(); ++k)
      worst = std::max(worst, std::abs(fine.node(set.offset(k)) - coarse.node(k)));
  }
  return {worst, 1e-15};
}

DenseTensor low_rank_tensor(const Extents& ext, std::size_t rank, std::uint64_t seed) {
  const NormalStream core_stream(seed, 100);
  DenseTensor t(Extents(ext.size(), rank));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = core_stream.at(i);
  std::vector<ModeFactor> factors;
  for (std::size_t j = 0; j < ext.size(); ++j)
    factors.push_back({gaussian_matrix(static_cast<Eigen::Index>(ext[j]),
                                       static_cast<Eigen::Index>(rank), seed, 200 + j),
                       j});
  DenseTensor out = multi_mode_product(t, factors);
  const NormalStream noise(seed, 300);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += 1e-4 * noise.at(i);
  return out;
}

Measure structure_preservation() {
  const DenseTensor t = low_rank_tensor({12, 12, 12}, 4, 21);
  double worst = 0.0;
  std::vector<TuckerTensor> fits;
  fits.push_back(method1(t, 3, 2, 4));
  fits.push_back(method2(t, 3, 1, method2_sample_set(12, 1), 4));
  fits.push_back(method3(t, 3, 2, 4));
  for (const TuckerTensor& tk : fits) {
    const auto& sets = *tk.selected;
    const DenseTensor approx = reconstruct(tk);
    const DenseTensor a = subtensor(approx, sets), b = subtensor(t, sets);
    worst = std::max(worst, frobenius_distance(a, b) / b.norm());
    for (std::size_t j = 0; j < tk.order(); ++j) {
      const Matrix& f = tk.factors[j];
      for (std::size_t k = 0; k < sets[j].size(); ++k)
        for (Eigen::Index c = 0; c < f.cols(); ++c)
          worst = std::max(worst, std::abs(f(static_cast<Eigen::Index>(sets[j].offset(k)), c) -
                                            (static_cast<Eigen::Index>(k) == c ? 1.0 : 0.0)));
    }
  }
  return {worst, 1e-9};
}

Measure hosvd_exact_rank() {
  const NormalStream s(8, 0);
  DenseTensor core({3, 3, 3});
  for (std::size_t i = 0; i < core.size(); ++i) core[i] = s.at(i);
  std::vector<ModeFactor> f;
  for (std::size_t j = 0; j < 3; ++j) f.push_back({gaussian_matrix(10, 3, 8, 1 + j), j});
  const DenseTensor t = multi_mode_product(core, f);
  return {relative_error(t, hosvd(t, 3)), 1e-12};
}

Measure method2_eval_count() {
  const TestFunction tf = builtin_function("f2");
  CountedFunction f(tf.f, 3);
  InterpolantConfig ic;
  ic.n = 27;
  ic.method = Method::m2;
  ic.rank = 3;
  ic.oversample = 2;
  ic.subsample_levels = 1;
  (void)build_interpolant(f, tf.domain, ic);
  const double bound = 3.0 * 27 * 81 + 125;
  return {static_cast<double>(f.eval_count()) / bound, 1.0};
}

LowRankKernel small_kernel(Matrix& x, Matrix& y) {
  const auto [sb, tb] = experiment_boxes(1.0, 3.0, 0.5, 2);
  x = uniform_points_in_box(sb, 40, 9, 0);
  y = uniform_points_in_box(tb, 30, 9, 1);
  LowRankConfig lc;
  lc.n = 9;
  lc.rank = 3;
  lc.oversample = 2;
  lc.seed = 9;
  return kernel_lowrank(x, y, sb, tb, KernelSpec::named("matern32"), lc);
}

Measure kernel_adjoint() {
  Matrix x, y;
  const LowRankKernel lrk = small_kernel(x, y);
  const NormalStream s(10, 0);
  const Vector v = s.matrix(lrk.cols(), 1, 0).col(0);
  const Vector w = s.matrix(lrk.rows(), 1, 1000).col(0);
  const double lhs = apply(lrk, v).dot(w), rhs = v.dot(transpose_apply(lrk, w));
  return {std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300), 1e-11};
}

Measure symmetric_construction() {
  const BoundingBox box({{0.0, 1.0}, {0.0, 2.0}});
  const Matrix x = uniform_points_in_box(box, 100, 12, 0);
  LowRankConfig lc;
  lc.n = 9;
  lc.rank = 4;
  lc.oversample = 0;
  lc.seed = 12;
  const Matrix k = to_dense(symmetric_lowrank(x, box, KernelSpec::named("gaussian"), lc));
  return {(k - k.transpose()).cwiseAbs().maxCoeff(), 1e-12};
}

Measure container_round_trip() {
  Matrix x, y;
  const LowRankKernel lrk = small_kernel(x, y);
  std::ostringstream a;
  write_lowrank(a, lrk);
  std::istringstream in(a.str());
  std::ostringstream b;
  write_lowrank(b, read_lowrank(in));

  const TestFunction tf = builtin_function("f3");
  CountedFunction f(tf.f, 3);
  InterpolantConfig ic;
  ic.n = 9;
  ic.rank = 3;
  ic.oversample = 1;
  const CompressedInterpolant ip = build_interpolant(f, tf.domain, ic);
  std::ostringstream c;
  write_interpolant(c, ip);
  std::istringstream in2(c.str());
  std::ostringstream d;
  write_interpolant(d, read_interpolant(in2));
  return {(a.str() == b.str() && c.str() == d.str()) ? 0.0 : 1.0, 0.0};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  const std::vector<std::pair<std::string, std::function<Measure()>>> checks = {
      {"philox_known_answers", philox_known_answers},
      {"normal_stream_random_access", stream_random_access},
      {"chebyshev_cardinality", cardinality},
      {"chebyshev_partition_of_unity", partition_of_unity},
      {"chebyshev_polynomial_reproduction", polynomial_reproduction},
      {"chebyshev_nested_nodes", nested_nodes},
      {"structure_preservation", structure_preservation},
      {"hosvd_exact_multirank", hosvd_exact_rank},
      {"method2_eval_count_ratio", method2_eval_count},
      {"kernel_apply_adjoint", kernel_adjoint},
      {"symmetric_lowrank_symmetry", symmetric_construction},
      {"container_round_trip", container_round_trip},
  };
  std::vector<SelftestResult> out;
  for (const auto& [name, fn] : checks) {
    SelftestResult r;
    r.name = name;
    try {
      const Measure m = fn();
      r.pass = m.value <= m.tol;
      r.detail = describe_measure(m);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("threw: ") + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_selftest(std::ostream& os, const std::vector<SelftestResult>& results) {
  std::size_t passed = 0;
  for (const auto& r : results) {
    os << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
    passed += r.pass;
  }
  os << "selftest: " << passed << "/" << results.size() << " passed\n";
}

}  // namespace tuckercheb::experiments
