#include "tuckercheb/kernel_lowrank.hpp"

#include "tuckercheb/container.hpp"
#include "tuckercheb/random.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace tuckercheb {

BoundingBox::BoundingBox(std::vector<Interval> intervals)
    : intervals_(std::move(intervals)) {
  if (intervals_.empty()) {
    throw std::invalid_argument("BoundingBox: need at least one dimension");
  }
}

bool BoundingBox::contains(std::span<const double> point) const {
  if (point.size() != dims()) return false;
  for (std::size_t j = 0; j < dims(); ++j) {
    if (!intervals_[j].contains(point[j])) return false;
  }
  return true;
}

bool BoundingBox::contains_all(const Matrix& points) const {
  if (static_cast<std::size_t>(points.cols()) != dims()) return false;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < dims(); ++j) {
      if (!intervals_[j].contains(points(i, Eigen::Index(j)))) return false;
    }
  }
  return true;
}

BoundingBox bounding_box(const Matrix& points, double pad) {
  if (points.rows() == 0 || points.cols() == 0) {
    throw std::invalid_argument("bounding_box: no points");
  }
  std::vector<Interval> ivs;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    double lo = points.col(j).minCoeff() - pad;
    double hi = points.col(j).maxCoeff() + pad;
    if (!(hi > lo)) {
      const double w = std::max(1e-12, std::abs(lo) * 1e-12);
      lo -= w;
      hi += w;
    }
    ivs.emplace_back(lo, hi);
  }
  return BoundingBox(std::move(ivs));
}

double diam(const BoundingBox& b) {
  double acc = 0.0;
  for (const auto& iv : b.intervals()) acc += iv.width() * iv.width();
  return std::sqrt(acc);
}

double dist(const BoundingBox& a, const BoundingBox& b) {
  if (a.dims() != b.dims()) {
    throw std::invalid_argument("dist: boxes have different dimensions");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < a.dims(); ++j) {
    const double gap =
        std::max({0.0, b[j].lo() - a[j].hi(), a[j].lo() - b[j].hi()});
    acc += gap * gap;
  }
  return std::sqrt(acc);
}

bool is_strongly_admissible(const BoundingBox& a, const BoundingBox& b,
                            double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("admissibility: eta must be > 0");
  const double d = dist(a, b);
  if (d == 0.0) return false;
  return std::max(diam(a), diam(b)) <= eta * d;
}

std::pair<BoundingBox, BoundingBox> experiment_boxes(double side,
                                                     double separation,
                                                     double theta,
                                                     std::size_t dims) {
  if (!(side > 0.0) || !(separation >= 0.0)) {
    throw std::invalid_argument("experiment_boxes: need side > 0, separation >= 0");
  }
  std::vector<double> corner(dims, 0.0);
  switch (dims) {
    case 1: corner[0] = separation; break;
    case 2:
      corner[0] = separation * std::cos(theta);
      corner[1] = separation * std::sin(theta);
      break;
    case 3:
      for (auto& c : corner) c = separation / std::sqrt(3.0);
      break;
    default:
      throw std::invalid_argument("experiment_boxes: dimension must be 1, 2 or 3");
  }
  std::vector<Interval> src, tgt;
  for (std::size_t j = 0; j < dims; ++j) {
    src.emplace_back(0.0, side);
    tgt.emplace_back(corner[j], corner[j] + side);
  }
  return {BoundingBox(std::move(src)), BoundingBox(std::move(tgt))};
}

Matrix uniform_points_in_box(const BoundingBox& box, std::size_t count,
                             std::uint64_t seed, std::uint64_t stream) {
  const UniformStream u(seed, stream);
  const std::size_t dims = box.dims();
  Matrix pts(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < dims; ++j) {
      pts(Eigen::Index(i), Eigen::Index(j)) =
          box[j].lo() + box[j].width() * u.at(i * dims + j);
    }
  }
  return pts;
}

std::vector<Matrix> build_factors(const Matrix& points, const BoundingBox& box,
                                  std::span<const ChebGrid> grids,
                                  const std::vector<Matrix>* a) {
  const std::size_t dims = box.dims();
  if (static_cast<std::size_t>(points.cols()) != dims || grids.size() != dims) {
    throw std::invalid_argument("build_factors: dimension mismatch");
  }
  if (a && a->size() < dims) {
    throw std::invalid_argument("build_factors: too few factor matrices");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < dims; ++j) {
      const double v = points(i, Eigen::Index(j));
      if (!box[j].contains(v)) {
        throw std::invalid_argument(
            "build_factors: point " + std::to_string(i) + " coordinate " +
            std::to_string(j) + " = " + std::to_string(v) +
            " lies outside [" + std::to_string(box[j].lo()) + ", " +
            std::to_string(box[j].hi()) + "]");
      }
    }
  }
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < dims; ++j) {
    const Vector col = points.col(Eigen::Index(j));
    Matrix u = s_matrix(grids[j], std::span<const double>(col.data(),
                                                          std::size_t(col.size())));
    out.push_back(a ? Matrix(u * (*a)[j]) : std::move(u));
  }
  return out;
}

Matrix khatri_rao_rows(const std::vector<Matrix>& factors, std::size_t count) {
  if (factors.empty()) throw std::invalid_argument("khatri_rao_rows: no factors");
  count = std::min(count, factors.size());
  Matrix f = Matrix::Ones(factors[0].rows(), 1);
  for (std::size_t j = 0; j < count; ++j) f = rowwise_khatri_rao(factors[j], f);
  return f;
}

Matrix LowRankKernel::core_matrix() const {
  return unfold_first(tucker.core, dims());
}

namespace {

// Coefficient tensor of the kernel on source grid x target grid; modes
// 0..D-1 are source coordinates, D..2D-1 target coordinates.
class KernelSource final : public EntrySource {
 public:
  KernelSource(const KernelSpec& k, std::vector<ChebGrid> src,
               std::vector<ChebGrid> tgt)
      : k_(k), src_(std::move(src)), tgt_(std::move(tgt)),
        x_(src_.size()), y_(tgt_.size()) {
    for (const auto& g : src_) extents_.push_back(g.size());
    for (const auto& g : tgt_) extents_.push_back(g.size());
  }
  [[nodiscard]] const Extents& extents() const override { return extents_; }
  [[nodiscard]] double entry(std::span<const std::size_t> idx) override {
    const std::size_t d = src_.size();
    for (std::size_t j = 0; j < d; ++j) {
      x_[j] = src_[j].node(idx[j]);
      y_[j] = tgt_[j].node(idx[j + d]);
    }
    const double v = k_.phi(k_.distance(x_.data(), y_.data(), d));
    if (!std::isfinite(v)) {
      throw NumericalError("kernel '" + std::string(k_.name()) +
                           "' is not finite at a grid node pair");
    }
    return v;
  }

 private:
  KernelSpec k_;
  std::vector<ChebGrid> src_, tgt_;
  Extents extents_;
  std::vector<double> x_, y_;
};

std::vector<ChebGrid> box_grids(const BoundingBox& b, std::size_t n) {
  std::vector<ChebGrid> g;
  for (const auto& iv : b.intervals()) g.emplace_back(iv, n);
  return g;
}

void check_config(const LowRankConfig& cfg, std::size_t dims) {
  if (dims < 1 || dims > 3) {
    throw std::invalid_argument("kernel low-rank: dimension must be 1, 2 or 3");
  }
  if (cfg.n < 1) throw std::invalid_argument("kernel low-rank: n must be >= 1");
  if (cfg.rank < 1 || cfg.core_rank() > cfg.n) {
    throw std::invalid_argument("kernel low-rank: need 1 <= r and r + p <= n (r=" +
                                std::to_string(cfg.rank) + ", p=" +
                                std::to_string(cfg.oversample) + ", n=" +
                                std::to_string(cfg.n) + ")");
  }
}

void check_dense_budget(const LowRankConfig& cfg, std::size_t order) {
  double entries = 1.0;
  for (std::size_t k = 0; k < order; ++k) entries *= double(cfg.n);
  if (entries > double(kMaxDenseEntries)) {
    std::ostringstream msg;
    msg << "method " << method_name(cfg.method) << " needs the full n^" << order
        << " = " << entries << " entry coefficient tensor (limit "
        << kMaxDenseEntries << "); use method m2 or a smaller n";
    throw std::invalid_argument(msg.str());
  }
}

void check_points(const Matrix& pts, const BoundingBox& box, const char* who) {
  if (static_cast<std::size_t>(pts.cols()) != box.dims()) {
    throw std::invalid_argument(std::string(who) +
                                ": point dimension does not match box");
  }
  if (pts.rows() < 1) throw std::invalid_argument(std::string(who) + ": no points");
  if (!box.contains_all(pts)) {
    throw std::invalid_argument(std::string(who) + ": points outside their box");
  }
}

std::vector<Matrix> first_factors(const TuckerTensor& tk, std::size_t from,
                                  std::size_t count) {
  return {tk.factors.begin() + std::ptrdiff_t(from),
          tk.factors.begin() + std::ptrdiff_t(from + count)};
}

}  // namespace

LowRankKernel kernel_lowrank(const Matrix& x, const Matrix& y,
                             const BoundingBox& source_box,
                             const BoundingBox& target_box,
                             const KernelSpec& kernel,
                             const LowRankConfig& cfg) {
  const std::size_t d = source_box.dims();
  if (target_box.dims() != d) {
    throw std::invalid_argument("kernel low-rank: boxes differ in dimension");
  }
  check_config(cfg, d);
  kernel.validate();
  check_points(x, source_box, "sources");
  check_points(y, target_box, "targets");
  if (kernel.singular_at_zero() && dist(source_box, target_box) == 0.0) {
    std::ostringstream msg;
    msg << "kernel '" << kernel.name()
        << "' is singular at r = 0 and the boxes touch or overlap (diam "
        << std::max(diam(source_box), diam(target_box)) << ", dist "
        << dist(source_box, target_box) << ")";
    throw std::invalid_argument(msg.str());
  }

  auto sg = box_grids(source_box, cfg.n);
  auto tg = box_grids(target_box, cfg.n);
  KernelSource src(kernel, sg, tg);
  LowRankKernel out{kernel, source_box, target_box, cfg, false, {}, {}, {}, 0};
  if (cfg.method == Method::m2) {
    CountingSource counter(src);
    const IndexSet s =
        method2_sample_set(cfg.n, cfg.subsample_levels, cfg.sample_rule);
    out.tucker = method2(counter, cfg.rank, cfg.oversample, s, cfg.seed);
    out.kernel_evals = counter.distinct_reads();
  } else {
    check_dense_budget(cfg, 2 * d);
    const DenseTensor m = materialize(src);
    out.kernel_evals = m.size();
    switch (cfg.method) {
      case Method::hosvd: out.tucker = hosvd(m, cfg.core_rank()); break;
      case Method::m1:
        out.tucker = method1(m, cfg.rank, cfg.oversample, cfg.seed);
        break;
      case Method::m3:
        out.tucker = method3(m, cfg.rank, cfg.oversample, cfg.seed);
        break;
      case Method::m2: break;
    }
  }
  const auto a_s = first_factors(out.tucker, 0, d);
  const auto a_t = first_factors(out.tucker, d, d);
  out.source_factors = build_factors(x, source_box, sg, &a_s);
  out.target_factors = build_factors(y, target_box, tg, &a_t);
  return out;
}

namespace {

// Order-2D coefficient tensor of a symmetric block generated one slab (fixed
// last index) at a time, so n^(2D) never has to fit in memory.
class SlabStream {
 public:
  SlabStream(const KernelSpec& k, const std::vector<ChebGrid>& grids)
      : k_(k), d_(grids.size()), n_(grids[0].size()) {
    for (std::size_t j = 0; j < d_; ++j) {
      Matrix t = Matrix::Zero(Eigen::Index(n_), Eigen::Index(n_));
      for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = 0; b < n_; ++b) {
          double diff = grids[j].node(a) - grids[j].node(b);
          if (!k_.scales.empty()) diff /= k_.scales[j];
          t(Eigen::Index(a), Eigen::Index(b)) = diff * diff;
        }
      }
      d2_.push_back(std::move(t));
    }
    slab_ext_.assign(2 * d_ - 1, n_);
  }

  [[nodiscard]] std::size_t order() const { return 2 * d_; }
  [[nodiscard]] std::size_t extent() const { return n_; }
  [[nodiscard]] std::size_t slabs() const { return n_; }
  [[nodiscard]] const Extents& slab_extents() const { return slab_ext_; }

  void fill(std::size_t s, DenseTensor& slab) const {
    std::vector<std::size_t> idx(2 * d_, 0);
    idx.back() = s;
    for (std::size_t lin = 0; lin < slab.size(); ++lin) {
      double r2 = 0.0;
      for (std::size_t j = 0; j < d_; ++j) {
        r2 += d2_[j](Eigen::Index(idx[j]), Eigen::Index(idx[j + d_]));
      }
      const double v = k_.phi(std::sqrt(r2));
      if (!std::isfinite(v)) {
        throw NumericalError("kernel '" + std::string(k_.name()) +
                             "' is not finite at a grid node pair");
      }
      slab[lin] = v;
      for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        if (++idx[k] < n_) break;
        idx[k] = 0;
      }
    }
  }

 private:
  const KernelSpec& k_;
  std::size_t d_, n_;
  std::vector<Matrix> d2_;
  Extents slab_ext_;
};

// Splits a slab viewed along `mode` into right-many L x n blocks.
template <class F>
void for_mode_blocks(const DenseTensor& slab, std::size_t mode, F&& f) {
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < mode; ++k) left *= slab.extent(k);
  for (std::size_t k = mode + 1; k < slab.order(); ++k) right *= slab.extent(k);
  const auto n = Eigen::Index(slab.extent(mode));
  const auto L = Eigen::Index(left);
  if (left == 1) {
    f(Eigen::Map<const Matrix>(slab.data(), n, Eigen::Index(right)).transpose(),
      0, Eigen::Index(right));
    return;
  }
  for (std::size_t r = 0; r < right; ++r) {
    f(Eigen::Map<const Matrix>(slab.data() + r * left * slab.extent(mode), L, n),
      Eigen::Index(r) * L, L);
  }
}

// R factor of a tall matrix fed a block of rows at a time (TSQR).
class StreamingR {
 public:
  StreamingR(Eigen::Index cols, Eigen::Index chunk)
      : buf_(Matrix::Zero(chunk + cols, cols)), cols_(cols) {}

  template <class Block>
  void add(const Block& rows) {
    Eigen::Index done = 0;
    while (done < rows.rows()) {
      const Eigen::Index room = buf_.rows() - used_;
      const Eigen::Index take = std::min(room, rows.rows() - done);
      buf_.middleRows(used_, take) = rows.middleRows(done, take);
      used_ += take;
      done += take;
      if (used_ == buf_.rows()) compact();
    }
  }

  Matrix r() {
    compact();
    return buf_.topRows(std::min(used_, cols_));
  }

 private:
  void compact() {
    if (used_ <= cols_) return;
    Eigen::HouseholderQR<Matrix> qr(buf_.topRows(used_));
    const Matrix r = qr.matrixQR().topRows(cols_).triangularView<Eigen::Upper>();
    buf_.topRows(cols_) = r;
    used_ = cols_;
  }

  Matrix buf_;
  Eigen::Index cols_;
  Eigen::Index used_ = 0;
};

// Leading left singular vectors of each mode unfolding M_(j) = R_j^T Q_j^T,
// from the streamed R factor of M_(j)^T.
std::vector<Matrix> stream_hosvd_factors(const SlabStream& st, std::size_t d,
                                         std::size_t ell) {
  const auto n = Eigen::Index(st.extent());
  std::vector<StreamingR> tsqr(d, StreamingR(n, 8192));
  DenseTensor slab(st.slab_extents());
  for (std::size_t s = 0; s < st.slabs(); ++s) {
    st.fill(s, slab);
    for (std::size_t j = 0; j < d; ++j) {
      for_mode_blocks(slab, j, [&](const auto& blk, Eigen::Index, Eigen::Index) {
        tsqr[j].add(blk);
      });
    }
  }
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < d; ++j) {
    const Matrix rt = tsqr[j].r().transpose();
    Eigen::JacobiSVD<Matrix> svd(rt, Eigen::ComputeThinU);
    out.push_back(svd.matrixU().leftCols(Eigen::Index(ell)));
  }
  return out;
}

DenseTensor stream_hosvd_core(const SlabStream& st,
                              const std::vector<Matrix>& a) {
  const std::size_t d = a.size();
  const std::size_t order = st.order();
  const auto ell = a[0].cols();
  std::vector<ModeFactor> proj;
  for (std::size_t k = 0; k + 1 < order; ++k) {
    proj.push_back({a[k % d].transpose(), k});
  }
  const Matrix& last = a[(order - 1) % d];
  Matrix g;
  DenseTensor slab(st.slab_extents());
  for (std::size_t s = 0; s < st.slabs(); ++s) {
    st.fill(s, slab);
    const DenseTensor z = multi_mode_product(slab, proj);
    Eigen::Map<const Vector> zv(z.data(), Eigen::Index(z.size()));
    if (g.size() == 0) g = Matrix::Zero(zv.size(), ell);
    g.noalias() += zv * last.row(Eigen::Index(s));
  }
  return DenseTensor(Extents(order, std::size_t(ell)),
                     std::vector<double>(g.data(), g.data() + g.size()));
}

std::vector<RridResult> stream_method1(const SlabStream& st, std::size_t d,
                                       std::size_t ell, std::uint64_t seed) {
  const auto n = Eigen::Index(st.extent());
  const std::size_t cols = product(st.slab_extents());
  const std::size_t rows_per_slab = cols / st.extent();
  std::vector<Matrix> y(d, Matrix::Zero(n, Eigen::Index(ell)));
  DenseTensor slab(st.slab_extents());
  Matrix omega = Matrix::Zero(Eigen::Index(rows_per_slab), Eigen::Index(ell));
  for (std::size_t s = 0; s < st.slabs(); ++s) {
    st.fill(s, slab);
    for (std::size_t j = 0; j < d; ++j) {
      // Rows s*R .. (s+1)*R of the cols x ell Gaussian matrix of stream j.
      const NormalStream ns(seed, j);
      for (std::size_t c = 0; c < ell; ++c) {
        omega.col(Eigen::Index(c)) =
            ns.matrix(Eigen::Index(rows_per_slab), 1, c * cols + s * rows_per_slab);
      }
      for_mode_blocks(slab, j, [&](const auto& blk, Eigen::Index r0, Eigen::Index L) {
        y[j].noalias() += blk.transpose() * omega.middleRows(r0, L);
      });
    }
  }
  std::vector<RridResult> out;
  for (auto& yj : y) out.push_back(interpolatory_rows(yj));
  return out;
}

std::vector<RridResult> stream_method3(const SlabStream& st, std::size_t d,
                                       std::size_t ell, std::uint64_t seed) {
  const std::size_t order = st.order();
  const auto n = Eigen::Index(st.extent());
  std::vector<Matrix> omegas;
  for (std::size_t s = 0; s + 1 < order; ++s) {
    omegas.push_back(gaussian_matrix(n, Eigen::Index(ell), seed, s));
  }
  std::vector<std::vector<ModeFactor>> proj(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = 0; k + 1 < order; ++k) {
      if (k == j) continue;
      proj[j].push_back({omegas[k < j ? k : k - 1].transpose(), k});
    }
  }
  // The last mode always takes the last Omega.
  const Matrix& last = omegas.back();
  std::vector<Matrix> x(d);
  DenseTensor slab(st.slab_extents());
  for (std::size_t s = 0; s < st.slabs(); ++s) {
    st.fill(s, slab);
    for (std::size_t j = 0; j < d; ++j) {
      const DenseTensor z = multi_mode_product(slab, proj[j]);
      Eigen::Map<const Vector> zv(z.data(), Eigen::Index(z.size()));
      if (x[j].size() == 0) x[j] = Matrix::Zero(zv.size(), Eigen::Index(ell));
      x[j].noalias() += zv * last.row(Eigen::Index(s));
    }
  }
  std::vector<RridResult> out;
  for (std::size_t j = 0; j < d; ++j) {
    Extents ext(order, ell);
    ext[j] = st.extent();
    const DenseTensor xt(ext, std::vector<double>(x[j].data(),
                                                  x[j].data() + x[j].size()));
    out.push_back(interpolatory_from_basis(leading_left_singular_vectors(xt, j, ell)));
  }
  return out;
}

}  // namespace

LowRankKernel symmetric_lowrank(const Matrix& x, const BoundingBox& box,
                                const KernelSpec& kernel,
                                const LowRankConfig& cfg) {
  const std::size_t d = box.dims();
  check_config(cfg, d);
  kernel.validate();
  check_points(x, box, "points");
  if (kernel.singular_at_zero()) {
    throw std::invalid_argument("kernel '" + std::string(kernel.name()) +
                                "' is singular at r = 0; the symmetric "
                                "construction needs a kernel finite on the "
                                "diagonal");
  }
  auto grids = box_grids(box, cfg.n);
  KernelSource src(kernel, grids, grids);
  const std::size_t ell = cfg.core_rank();

  LowRankKernel out{kernel, box, box, cfg, true, {}, {}, {}, 0};
  std::vector<IndexSet> sets;
  if (cfg.method == Method::m2) {
    CountingSource counter(src);
    const IndexSet s =
        method2_sample_set(cfg.n, cfg.subsample_levels, cfg.sample_rule);
    const std::vector<IndexSet> samples(2 * d, s);
    for (std::size_t j = 0; j < d; ++j) {
      ModeFactorResult r =
          method2_factor(counter, j, cfg.rank, cfg.oversample, samples, cfg.seed);
      out.tucker.rng_draws += r.rng_draws;
      out.tucker.factors.push_back(std::move(r.factor));
      sets.push_back(std::move(r.selected));
    }
    for (std::size_t j = 0; j < d; ++j) sets.push_back(sets[j]);
    out.tucker.core = cross_core(counter, sets);
    out.kernel_evals = counter.distinct_reads();
  } else {
    if (ell > cfg.n) throw std::invalid_argument("symmetric: r + p exceeds n");
    const SlabStream st(kernel, grids);
    double full = 1.0;
    for (std::size_t k = 0; k < 2 * d; ++k) full *= double(cfg.n);
    out.kernel_evals = static_cast<std::uint64_t>(full);
    if (cfg.method == Method::hosvd) {
      out.tucker.factors = stream_hosvd_factors(st, d, ell);
      out.tucker.core = stream_hosvd_core(st, out.tucker.factors);
    } else {
      std::vector<RridResult> res;
      if (cfg.method == Method::m1) {
        res = stream_method1(st, d, ell, cfg.seed);
        const double cols = full / double(cfg.n);
        out.tucker.rng_draws = static_cast<std::uint64_t>(double(d) * cols * double(ell));
      } else {
        res = stream_method3(st, d, ell, cfg.seed);
        out.tucker.rng_draws = (2 * d - 1) * cfg.n * ell;
      }
      for (auto& r : res) {
        out.tucker.factors.push_back(std::move(r.factor));
        sets.push_back(std::move(r.selected));
      }
      for (std::size_t j = 0; j < d; ++j) sets.push_back(sets[j]);
      out.tucker.core = cross_core(src, sets);
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    out.tucker.factors.push_back(out.tucker.factors[j]);
  }
  if (!sets.empty()) out.tucker.selected = std::move(sets);
  const auto a = first_factors(out.tucker, 0, d);
  out.source_factors = build_factors(x, box, grids, &a);
  out.target_factors = out.source_factors;
  return out;
}

namespace {

// Contracts the Khatri-Rao rows of `f` against v: returns F^T v reshaped to
// l^(D-1) x l (column-major vec equals F^T v).
Matrix kr_transpose_times(const std::vector<Matrix>& f, const Vector& v) {
  const std::size_t d = f.size();
  const Matrix lead = khatri_rao_rows(f, d - 1);
  return lead.transpose() * (v.asDiagonal() * f[d - 1]);
}

// F z for z = vec(Z), Z of shape l^(D-1) x l.
Vector kr_times(const std::vector<Matrix>& f, const Matrix& z) {
  const std::size_t d = f.size();
  const Matrix lead = khatri_rao_rows(f, d - 1);
  return ((lead * z).cwiseProduct(f[d - 1])).rowwise().sum();
}

Vector apply_impl(const std::vector<Matrix>& out_f, const Matrix& core,
                  const std::vector<Matrix>& in_f, const Vector& v) {
  if (v.size() != in_f[0].rows()) {
    throw std::invalid_argument("apply: vector length " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(in_f[0].rows()));
  }
  const Matrix w = kr_transpose_times(in_f, v);
  const Vector wv = Eigen::Map<const Vector>(w.data(), w.size());
  const Vector z = core * wv;
  const Eigen::Index last = out_f.back().cols();
  const Matrix zm = Eigen::Map<const Matrix>(z.data(), z.size() / last, last);
  return kr_times(out_f, zm);
}

}  // namespace

Vector apply(const LowRankKernel& lrk, const Vector& v) {
  return apply_impl(lrk.source_factors, lrk.core_matrix(), lrk.target_factors, v);
}

Vector transpose_apply(const LowRankKernel& lrk, const Vector& w) {
  return apply_impl(lrk.target_factors, lrk.core_matrix().transpose(),
                    lrk.source_factors, w);
}

Matrix to_dense(const LowRankKernel& lrk) {
  const Matrix fs = khatri_rao_rows(lrk.source_factors);
  const Matrix ft = khatri_rao_rows(lrk.target_factors);
  return (fs * lrk.core_matrix()) * ft.transpose();
}

namespace {

// Thin QR F = Q R with Q of min(rows, cols) orthonormal columns.
std::pair<Matrix, Matrix> thin_qr(const Matrix& f) {
  const Eigen::Index k = std::min(f.rows(), f.cols());
  Eigen::HouseholderQR<Matrix> qr(f);
  Matrix q = qr.householderQ() * Matrix::Identity(f.rows(), k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

}  // namespace

SvdKernel recompress(const LowRankKernel& lrk, std::size_t rank) {
  const auto [qs, rs] = thin_qr(khatri_rao_rows(lrk.source_factors));
  const auto [qt, rt] = thin_qr(khatri_rao_rows(lrk.target_factors));
  const Matrix b = rs * lrk.core_matrix() * rt.transpose();
  const auto limit = static_cast<std::size_t>(std::min(b.rows(), b.cols()));
  if (rank < 1 || rank > limit) {
    throw std::invalid_argument("recompress: rank " + std::to_string(rank) +
                                " not in [1, " + std::to_string(limit) + "]");
  }
  SvdFactors f = truncated_svd(b, rank);
  return {qs * f.u, std::move(f.s), qt * f.v};
}

Vector apply(const SvdKernel& k, const Vector& v) {
  if (v.size() != k.v.rows()) {
    throw std::invalid_argument("apply: vector length mismatch");
  }
  return k.u * (k.s.asDiagonal() * (k.v.transpose() * v));
}

Matrix to_dense(const SvdKernel& k) {
  return k.u * k.s.asDiagonal() * k.v.transpose();
}

SvdKernel chebyshev_randsvd(const Matrix& x, const Matrix& y,
                            const BoundingBox& source_box,
                            const BoundingBox& target_box,
                            const KernelSpec& kernel, std::size_t n,
                            std::size_t rank, std::size_t oversample,
                            std::uint64_t seed) {
  const std::size_t d = source_box.dims();
  LowRankConfig cfg;
  cfg.n = n;
  cfg.rank = 1;
  cfg.oversample = 0;
  check_config(cfg, d);
  check_dense_budget(cfg, 2 * d);
  check_points(x, source_box, "sources");
  check_points(y, target_box, "targets");
  const auto sg = box_grids(source_box, n);
  const auto tg = box_grids(target_box, n);
  KernelSource src(kernel, sg, tg);
  const Matrix m = unfold_first(materialize(src), d);
  const Matrix fs = khatri_rao_rows(build_factors(x, source_box, sg));
  const Matrix ft = khatri_rao_rows(build_factors(y, target_box, tg));
  const Matrix a = (fs * m) * ft.transpose();
  SvdFactors f = randomized_svd(a, rank, oversample, seed);
  return {std::move(f.u), std::move(f.s), std::move(f.v)};
}

double max_norm_relative_error(const Matrix& k, const Matrix& approx) {
  if (k.rows() != approx.rows() || k.cols() != approx.cols()) {
    throw std::invalid_argument("max_norm_relative_error: shape mismatch");
  }
  const double nrm = k.cwiseAbs().maxCoeff();
  if (nrm == 0.0) throw std::invalid_argument("max_norm_relative_error: zero matrix");
  return (k - approx).cwiseAbs().maxCoeff() / nrm;
}

double max_norm_relative_error(const Matrix& k, const LowRankKernel& lrk) {
  return max_norm_relative_error(k, to_dense(lrk));
}

double max_norm_relative_error(const Matrix& k, const SvdKernel& svd) {
  return max_norm_relative_error(k, to_dense(svd));
}

double trace_relative_error(const Matrix& x, const KernelSpec& kernel,
                            const LowRankKernel& lrk) {
  if (!lrk.symmetric) {
    throw std::invalid_argument("trace_relative_error: needs a symmetric construction");
  }
  if (x.rows() != lrk.rows()) {
    throw std::invalid_argument("trace_relative_error: point count mismatch");
  }
  double tr = 0.0;
  const double diag = kernel.phi(0.0);
  tr = diag * double(x.rows());
  if (tr == 0.0) throw std::invalid_argument("trace_relative_error: zero trace");
  const Matrix f = khatri_rao_rows(lrk.source_factors);
  const double tr_hat = ((f * lrk.core_matrix()).cwiseProduct(f)).sum();
  return std::abs(tr - tr_hat) / std::abs(tr);
}

Matrix read_points_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_allowed = true;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t\r");
      const auto e = tok.find_last_not_of(" \t\r");
      tok = b == std::string::npos ? "" : tok.substr(b, e - b + 1);
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (tok.empty() || *end != '\0') {
        numeric = false;
        break;
      }
      vals.push_back(v);
    }
    if (!numeric) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw std::invalid_argument("points CSV line " + std::to_string(lineno) +
                                  ": non-numeric field");
    }
    header_allowed = false;
    if (!rows.empty() && vals.size() != rows[0].size()) {
      throw std::invalid_argument("points CSV line " + std::to_string(lineno) +
                                  ": expected " + std::to_string(rows[0].size()) +
                                  " coordinates");
    }
    for (double v : vals) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("points CSV line " + std::to_string(lineno) +
                                    ": non-finite coordinate");
      }
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::invalid_argument("points CSV: no points");
  Matrix out(Eigen::Index(rows.size()), Eigen::Index(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
  return out;
}

void write_points_csv(std::ostream& os, const Matrix& points) {
  char buf[32];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", points(i, j));
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
}

namespace {

void write_box(std::ostream& os, std::string_view tag, const BoundingBox& b) {
  os << tag;
  for (const auto& iv : b.intervals()) {
    os << ' ';
    container::write_double(os, iv.lo());
    os << ' ';
    container::write_double(os, iv.hi());
  }
  os << '\n';
}

BoundingBox read_box(std::istream& is, std::string_view tag, std::size_t d) {
  container::expect(is, tag);
  std::vector<Interval> ivs;
  for (std::size_t j = 0; j < d; ++j) {
    const double lo = container::read_double(is);
    const double hi = container::read_double(is);
    ivs.emplace_back(lo, hi);
  }
  return BoundingBox(std::move(ivs));
}

}  // namespace

void write_lowrank(std::ostream& os, const LowRankKernel& lrk) {
  using namespace container;
  const auto& c = lrk.config;
  os << "tuckercheb-lowrank 1\n";
  os << "kernel " << lrk.kernel.name() << ' ';
  write_double(os, lrk.kernel.sigma);
  os << " scales " << lrk.kernel.scales.size();
  for (double s : lrk.kernel.scales) {
    os << ' ';
    write_double(os, s);
  }
  os << '\n' << "dims " << lrk.dims() << '\n';
  write_box(os, "source_box", lrk.source_box);
  write_box(os, "target_box", lrk.target_box);
  os << "n " << c.n << '\n'
     << "method " << method_name(c.method) << '\n'
     << "rank " << c.rank << '\n'
     << "oversample " << c.oversample << '\n'
     << "levels " << c.subsample_levels << '\n'
     << "sample_rule " << sample_rule_name(c.sample_rule) << '\n'
     << "seed " << c.seed << '\n'
     << "symmetric " << (lrk.symmetric ? 1 : 0) << '\n'
     << "kernel_evals " << lrk.kernel_evals << '\n'
     << "rng_draws " << lrk.tucker.rng_draws << '\n';
  write_tensor(os, "core", lrk.tucker.core);
  for (const auto& a : lrk.tucker.factors) write_matrix(os, "factor", a);
  if (lrk.tucker.selected) {
    os << "selected " << lrk.tucker.selected->size() << '\n';
    for (const auto& s : *lrk.tucker.selected) write_index_set(os, "set", s);
  } else {
    os << "selected 0\n";
  }
  for (const auto& u : lrk.source_factors) write_matrix(os, "source_factor", u);
  for (const auto& v : lrk.target_factors) write_matrix(os, "target_factor", v);
  os << "end\n";
}

LowRankKernel read_lowrank(std::istream& is) {
  using namespace container;
  expect(is, "tuckercheb-lowrank");
  if (read_size(is) != 1) throw std::runtime_error("unsupported low-rank version");
  expect(is, "kernel");
  const std::string name = read_token(is);
  const double sigma = read_double(is);
  KernelSpec k = KernelSpec::named(name, sigma);
  expect(is, "scales");
  const std::size_t ns = read_size(is);
  for (std::size_t i = 0; i < ns; ++i) k.scales.push_back(read_double(is));
  expect(is, "dims");
  const std::size_t d = read_size(is);
  BoundingBox sb = read_box(is, "source_box", d);
  BoundingBox tb = read_box(is, "target_box", d);
  LowRankConfig c;
  expect(is, "n");
  c.n = read_size(is);
  expect(is, "method");
  c.method = parse_method(read_token(is));
  expect(is, "rank");
  c.rank = read_size(is);
  expect(is, "oversample");
  c.oversample = read_size(is);
  expect(is, "levels");
  c.subsample_levels = read_size(is);
  expect(is, "sample_rule");
  c.sample_rule = parse_sample_rule(read_token(is));
  expect(is, "seed");
  c.seed = read_u64(is);
  LowRankKernel out{k, sb, tb, c, false, {}, {}, {}, 0};
  expect(is, "symmetric");
  out.symmetric = read_size(is) != 0;
  expect(is, "kernel_evals");
  out.kernel_evals = read_u64(is);
  expect(is, "rng_draws");
  out.tucker.rng_draws = read_u64(is);
  out.tucker.core = read_tensor(is, "core");
  for (std::size_t j = 0; j < 2 * d; ++j) {
    out.tucker.factors.push_back(read_matrix(is, "factor"));
  }
  expect(is, "selected");
  const std::size_t nsel = read_size(is);
  if (nsel > 0) {
    std::vector<IndexSet> sets;
    for (std::size_t j = 0; j < nsel; ++j) sets.push_back(read_index_set(is, "set"));
    out.tucker.selected = std::move(sets);
  }
  for (std::size_t j = 0; j < d; ++j) {
    out.source_factors.push_back(read_matrix(is, "source_factor"));
  }
  for (std::size_t j = 0; j < d; ++j) {
    out.target_factors.push_back(read_matrix(is, "target_factor"));
  }
  expect(is, "end");
  out.tucker.validate();
  return out;
}

}  // namespace tuckercheb
