#include "tuckercheb/fun_approx.hpp"

#include "tuckercheb/container.hpp"
#include "tuckercheb/random.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace tuckercheb {

Domain::Domain(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  if (intervals_.empty()) {
    throw std::invalid_argument("Domain: need at least one dimension");
  }
}

Domain Domain::cube(std::size_t dims, Interval iv) {
  return Domain(std::vector<Interval>(dims, iv));
}

bool Domain::contains(std::span<const double> point) const {
  if (point.size() != dims()) return false;
  for (std::size_t k = 0; k < dims(); ++k) {
    if (!intervals_[k].contains(point[k])) return false;
  }
  return true;
}

std::vector<ChebGrid> make_grids(const Domain& domain, std::size_t n) {
  if (n == 0) throw std::invalid_argument("Chebyshev degree n must be >= 1");
  std::vector<ChebGrid> grids;
  grids.reserve(domain.dims());
  for (const auto& iv : domain.intervals()) grids.emplace_back(iv, n);
  return grids;
}

CountedFunction::CountedFunction(Fn f, std::size_t dims)
    : f_(std::move(f)), dims_(dims) {
  if (!f_) throw std::invalid_argument("CountedFunction: empty function");
  if (dims_ == 0) throw std::invalid_argument("CountedFunction: zero dims");
}

double CountedFunction::at_grid(std::span<const ChebGrid> grids,
                                std::span<const std::size_t> index) {
  if (grids.size() != dims_ || index.size() != dims_) {
    throw std::invalid_argument("CountedFunction: dimension mismatch");
  }
  GridKey key;
  key.reserve(3 * dims_);
  std::uint64_t lin = 0, stride = 1;
  for (std::size_t k = 0; k < dims_; ++k) {
    key.push_back(double(grids[k].size()));
    key.push_back(grids[k].interval().lo());
    key.push_back(grids[k].interval().hi());
    lin += index[k] * stride;
    stride *= grids[k].size();
  }
  std::lock_guard lock(mutex_);
  auto& table = memo_[key];
  if (auto it = table.find(lin); it != table.end()) return it->second;

  std::vector<double> x(dims_);
  for (std::size_t k = 0; k < dims_; ++k) x[k] = grids[k].node(index[k]);
  const double v = f_(x);
  ++count_;
  if (!std::isfinite(v)) {
    std::string where;
    for (double xk : x) where += (where.empty() ? "" : ", ") + std::to_string(xk);
    throw NumericalError("function returned a non-finite value at (" + where +
                         ")");
  }
  table.emplace(lin, v);
  return v;
}

GridSource::GridSource(CountedFunction& f, std::vector<ChebGrid> grids)
    : f_(&f), grids_(std::move(grids)) {
  for (const auto& g : grids_) extents_.push_back(g.size());
}

std::string_view sample_rule_name(SampleRule r) {
  return r == SampleRule::nested ? "nested" : "shifted";
}

SampleRule parse_sample_rule(std::string_view name) {
  if (name == "shifted") return SampleRule::shifted;
  if (name == "nested") return SampleRule::nested;
  throw std::invalid_argument("unknown sample rule '" + std::string(name) +
                              "' (expected shifted or nested)");
}

IndexSet method2_sample_set(std::size_t n, std::size_t levels,
                            SampleRule rule) {
  if (levels == 0) return IndexSet::full(n);
  IndexSet nested = subsample_indices(n, levels);
  if (rule == SampleRule::nested) return nested;
  std::vector<std::size_t> idx = nested.indices();
  for (auto& v : idx) --v;
  return IndexSet(std::move(idx), n);
}

DenseTensor build_full_tensor(CountedFunction& f, const Domain& domain,
                              std::size_t n) {
  if (f.dims() != domain.dims()) {
    throw std::invalid_argument("build_full_tensor: function/domain dims differ");
  }
  GridSource src(f, make_grids(domain, n));
  return materialize(src);
}

CompressedInterpolant build_interpolant(CountedFunction& f, const Domain& domain,
                                        const InterpolantConfig& cfg) {
  if (f.dims() != domain.dims()) {
    throw std::invalid_argument("build_interpolant: function/domain dims differ");
  }
  if (cfg.rank < 1 || cfg.core_rank() > cfg.n) {
    throw std::invalid_argument("build_interpolant: need 1 <= r and r + p <= n (r=" +
                                std::to_string(cfg.rank) + ", p=" +
                                std::to_string(cfg.oversample) +
                                ", n=" + std::to_string(cfg.n) + ")");
  }
  auto grids = make_grids(domain, cfg.n);
  TuckerTensor tk;
  if (cfg.method == Method::m2) {
    GridSource src(f, grids);
    tk = method2(src, cfg.rank, cfg.oversample,
                 method2_sample_set(cfg.n, cfg.subsample_levels, cfg.sample_rule),
                 cfg.seed);
  } else {
    const DenseTensor m = build_full_tensor(f, domain, cfg.n);
    switch (cfg.method) {
      case Method::hosvd: tk = hosvd(m, cfg.core_rank()); break;
      case Method::m1: tk = method1(m, cfg.rank, cfg.oversample, cfg.seed); break;
      case Method::m3: tk = method3(m, cfg.rank, cfg.oversample, cfg.seed); break;
      case Method::m2: break;
    }
  }
  return {domain, cfg, std::move(grids), std::move(tk)};
}

CompressedInterpolant full_interpolant(CountedFunction& f, const Domain& domain,
                                       std::size_t n) {
  TuckerTensor tk;
  tk.core = build_full_tensor(f, domain, n);
  std::vector<IndexSet> sets;
  for (std::size_t k = 0; k < domain.dims(); ++k) {
    tk.factors.push_back(Matrix::Identity(static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(n)));
    sets.push_back(IndexSet::full(n));
  }
  tk.selected = std::move(sets);
  InterpolantConfig cfg;
  cfg.n = n;
  cfg.method = Method::m1;
  cfg.rank = n;
  cfg.oversample = 0;
  return {domain, cfg, make_grids(domain, n), std::move(tk)};
}

double evaluate(const CompressedInterpolant& ip, std::span<const double> point) {
  const std::size_t dims = ip.domain.dims();
  if (point.size() != dims) {
    throw std::invalid_argument("evaluate: point has " +
                                std::to_string(point.size()) +
                                " coordinates, interpolant has " +
                                std::to_string(dims));
  }
  const auto& core = ip.tucker.core;
  std::vector<double> cur(core.values().begin(), core.values().end());
  std::size_t rest = core.size();
  for (std::size_t k = 0; k < dims; ++k) {
    const RowVector s_hat = s_vector(ip.grids[k], point[k]) * ip.tucker.factors[k];
    const auto ell = static_cast<Eigen::Index>(core.extent(k));
    rest /= static_cast<std::size_t>(ell);
    Eigen::Map<const Matrix> block(cur.data(), ell,
                                   static_cast<Eigen::Index>(rest));
    Vector next = block.transpose() * s_hat.transpose();
    cur.assign(next.data(), next.data() + next.size());
  }
  return cur[0];
}

double CompressedInterpolant::operator()(std::span<const double> point) const {
  return evaluate(*this, point);
}

Matrix uniform_points(const Domain& domain, std::size_t count,
                      std::uint64_t seed) {
  const UniformStream u(seed, 0x5eed0001u);
  const std::size_t dims = domain.dims();
  Matrix pts(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < dims; ++k) {
      const Interval& iv = domain[k];
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          iv.lo() + iv.width() * u.at(i * dims + k);
    }
  }
  return pts;
}

double sample_error(const CountedFunction::Fn& f, const CompressedInterpolant& ip,
                    std::size_t count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_error: count must be >= 1");
  const Matrix pts = uniform_points(ip.domain, count, seed);
  double max_err = 0.0, max_ref = 0.0;
  std::vector<double> x(ip.domain.dims());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = pts(i, static_cast<Eigen::Index>(k));
    }
    const double ref = f(x);
    max_ref = std::max(max_ref, std::abs(ref));
    max_err = std::max(max_err, std::abs(ref - evaluate(ip, x)));
  }
  if (max_ref == 0.0) {
    throw std::invalid_argument("sample_error: function vanishes at all samples");
  }
  return max_err / max_ref;
}

void write_interpolant(std::ostream& os, const CompressedInterpolant& ip) {
  using namespace container;
  const auto& cfg = ip.config;
  os << "tuckercheb-interpolant 1\n";
  os << "dims " << ip.domain.dims() << '\n';
  for (const auto& iv : ip.domain.intervals()) {
    os << "interval ";
    write_double(os, iv.lo());
    os << ' ';
    write_double(os, iv.hi());
    os << '\n';
  }
  os << "n " << cfg.n << '\n'
     << "method " << method_name(cfg.method) << '\n'
     << "rank " << cfg.rank << '\n'
     << "oversample " << cfg.oversample << '\n'
     << "levels " << cfg.subsample_levels << '\n'
     << "sample_rule " << sample_rule_name(cfg.sample_rule) << '\n'
     << "seed " << cfg.seed << '\n'
     << "rng_draws " << ip.tucker.rng_draws << '\n';
  write_tensor(os, "core", ip.tucker.core);
  for (const auto& a : ip.tucker.factors) write_matrix(os, "factor", a);
  if (ip.tucker.selected) {
    os << "selected " << ip.tucker.selected->size() << '\n';
    for (const auto& s : *ip.tucker.selected) write_index_set(os, "set", s);
  } else {
    os << "selected 0\n";
  }
  os << "end\n";
}

CompressedInterpolant read_interpolant(std::istream& is) {
  using namespace container;
  expect(is, "tuckercheb-interpolant");
  if (read_size(is) != 1) throw std::runtime_error("unsupported interpolant version");
  expect(is, "dims");
  const std::size_t dims = read_size(is);
  std::vector<Interval> ivs;
  for (std::size_t k = 0; k < dims; ++k) {
    expect(is, "interval");
    const double lo = read_double(is);
    const double hi = read_double(is);
    ivs.emplace_back(lo, hi);
  }
  InterpolantConfig cfg;
  expect(is, "n");
  cfg.n = read_size(is);
  expect(is, "method");
  cfg.method = parse_method(read_token(is));
  expect(is, "rank");
  cfg.rank = read_size(is);
  expect(is, "oversample");
  cfg.oversample = read_size(is);
  expect(is, "levels");
  cfg.subsample_levels = read_size(is);
  expect(is, "sample_rule");
  cfg.sample_rule = parse_sample_rule(read_token(is));
  expect(is, "seed");
  cfg.seed = read_u64(is);
  TuckerTensor tk;
  expect(is, "rng_draws");
  tk.rng_draws = read_u64(is);
  tk.core = read_tensor(is, "core");
  for (std::size_t k = 0; k < dims; ++k) {
    tk.factors.push_back(read_matrix(is, "factor"));
  }
  expect(is, "selected");
  const std::size_t nsel = read_size(is);
  if (nsel > 0) {
    std::vector<IndexSet> sets;
    for (std::size_t k = 0; k < nsel; ++k) sets.push_back(read_index_set(is, "set"));
    tk.selected = std::move(sets);
  }
  expect(is, "end");
  tk.validate();
  Domain domain(std::move(ivs));
  auto grids = make_grids(domain, cfg.n);
  return {std::move(domain), cfg, std::move(grids), std::move(tk)};
}

}  // namespace tuckercheb
