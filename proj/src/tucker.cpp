#include "tuckercheb/tucker.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <stdexcept>

namespace tuckercheb {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::hosvd: return "hosvd";
    case Method::m1: return "m1";
    case Method::m2: return "m2";
    case Method::m3: return "m3";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "hosvd") return Method::hosvd;
  if (name == "m1") return Method::m1;
  if (name == "m2") return Method::m2;
  if (name == "m3") return Method::m3;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

Extents TuckerTensor::ranks() const {
  Extents r;
  r.reserve(factors.size());
  for (const auto& a : factors) r.push_back(static_cast<std::size_t>(a.cols()));
  return r;
}

void TuckerTensor::validate() const {
  if (factors.size() != core.order()) {
    throw std::invalid_argument("TuckerTensor: factor count != core order");
  }
  for (std::size_t j = 0; j < factors.size(); ++j) {
    if (static_cast<std::size_t>(factors[j].cols()) != core.extent(j)) {
      throw std::invalid_argument("TuckerTensor: factor " + std::to_string(j) +
                                  " columns != core extent");
    }
  }
  if (selected) {
    if (selected->size() != factors.size()) {
      throw std::invalid_argument("TuckerTensor: selected set count mismatch");
    }
    for (std::size_t j = 0; j < factors.size(); ++j) {
      if ((*selected)[j].size() != core.extent(j) ||
          (*selected)[j].parent_extent() !=
              static_cast<std::size_t>(factors[j].rows())) {
        throw std::invalid_argument("TuckerTensor: selected set " +
                                    std::to_string(j) + " has wrong shape");
      }
    }
  }
}

double CountingSource::entry(std::span<const std::size_t> index) {
  const Extents& ext = inner_->extents();
  std::uint64_t key = 0, stride = 1;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    key += index[k] * stride;
    stride *= ext[k];
  }
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double v = inner_->entry(index);
  cache_.emplace(key, v);
  return v;
}

DenseTensor materialize(EntrySource& src) {
  DenseTensor t(src.extents());
  const Extents& ext = t.extents();
  std::vector<std::size_t> idx(t.order(), 0);
  for (std::size_t lin = 0; lin < t.size(); ++lin) {
    t[lin] = src.entry(idx);
    // Odometer step, mode 0 fastest.
    for (std::size_t k = 0; k < idx.size() && ++idx[k] == ext[k]; ++k) idx[k] = 0;
  }
  return t;
}

namespace {

std::size_t checked_sketch_size(std::size_t rank, std::size_t oversample) {
  if (rank < 1) throw std::invalid_argument("target rank must be >= 1");
  return rank + oversample;
}

// unfold(t, mode) * omega without forming the unfolding.
Matrix sketch_unfolding(const DenseTensor& t, std::size_t mode,
                        const Matrix& omega) {
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < mode; ++k) left *= t.extent(k);
  for (std::size_t k = mode + 1; k < t.order(); ++k) right *= t.extent(k);
  const auto n = static_cast<Eigen::Index>(t.extent(mode));
  const auto L = static_cast<Eigen::Index>(left);
  Matrix y = Matrix::Zero(n, omega.cols());
  for (std::size_t r = 0; r < right; ++r) {
    Eigen::Map<const Matrix> slab(t.data() + r * left * t.extent(mode), L, n);
    y.noalias() +=
        slab.transpose() * omega.middleRows(static_cast<Eigen::Index>(r) * L, L);
  }
  return y;
}

// Transposed mode unfolding: row c of the result is column c of unfold().
Matrix unfold_transposed(const DenseTensor& t, std::size_t mode) {
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < mode; ++k) left *= t.extent(k);
  for (std::size_t k = mode + 1; k < t.order(); ++k) right *= t.extent(k);
  const std::size_t n = t.extent(mode);
  Matrix m(static_cast<Eigen::Index>(left * right),
           static_cast<Eigen::Index>(n));
  const auto L = static_cast<Eigen::Index>(left);
  for (std::size_t r = 0; r < right; ++r) {
    Eigen::Map<const Matrix> slab(t.data() + r * left * n, L,
                                  static_cast<Eigen::Index>(n));
    m.middleRows(static_cast<Eigen::Index>(r) * L, L) = slab;
  }
  return m;
}

// Left singular factors of unfold(t, mode). Wide unfoldings are reduced to a
// square triangular factor by an in-place QR of the transpose first.
Eigen::JacobiSVD<Matrix> mode_svd(const DenseTensor& t, std::size_t mode,
                                  bool want_u) {
  const unsigned opts = want_u ? unsigned(Eigen::ComputeThinU) : 0u;
  const std::size_t n = t.extent(mode);
  const std::size_t cols = t.size() / n;
  if (cols <= n) return Eigen::JacobiSVD<Matrix>(unfold(t, mode), opts);
  Matrix mt = unfold_transposed(t, mode);
  Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(mt);
  const auto N = static_cast<Eigen::Index>(n);
  Matrix rt = qr.matrixQR()
                  .topRows(N)
                  .template triangularView<Eigen::Upper>()
                  .toDenseMatrix()
                  .transpose();
  return Eigen::JacobiSVD<Matrix>(rt, opts);
}

void check_uniform_sketch(const Extents& ext, std::size_t ell,
                          const char* who) {
  for (std::size_t k = 0; k < ext.size(); ++k) {
    if (ell > ext[k]) {
      throw std::invalid_argument(std::string(who) + ": r + p = " +
                                  std::to_string(ell) + " exceeds extent " +
                                  std::to_string(ext[k]) + " of mode " +
                                  std::to_string(k));
    }
  }
}

}  // namespace

DenseTensor cross_core(EntrySource& src, std::span<const IndexSet> sets) {
  Extents ext;
  for (const auto& s : sets) ext.push_back(s.size());
  DenseTensor core(ext);
  std::vector<std::size_t> sub(ext.size()), full(ext.size());
  for (std::size_t lin = 0; lin < core.size(); ++lin) {
    core.multi_index(lin, sub);
    for (std::size_t k = 0; k < ext.size(); ++k) full[k] = sets[k].offset(sub[k]);
    core[lin] = src.entry(full);
  }
  return core;
}

Matrix leading_left_singular_vectors(const DenseTensor& t, std::size_t mode,
                                     std::size_t rank) {
  if (mode >= t.order()) throw std::out_of_range("mode out of range");
  if (rank < 1 || rank > t.extent(mode) || rank > t.size() / t.extent(mode)) {
    throw std::invalid_argument("hosvd: rank " + std::to_string(rank) +
                                " too large for mode " + std::to_string(mode));
  }
  auto svd = mode_svd(t, mode, true);
  return svd.matrixU().leftCols(static_cast<Eigen::Index>(rank));
}

std::vector<double> mode_singular_values(const DenseTensor& t,
                                         std::size_t mode) {
  if (mode >= t.order()) throw std::out_of_range("mode out of range");
  auto svd = mode_svd(t, mode, false);
  const Vector& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

TuckerTensor hosvd(const DenseTensor& t, std::span<const std::size_t> ranks) {
  if (ranks.size() != t.order()) {
    throw std::invalid_argument("hosvd: need one rank per mode");
  }
  TuckerTensor tk;
  std::vector<ModeFactor> proj;
  for (std::size_t j = 0; j < t.order(); ++j) {
    tk.factors.push_back(leading_left_singular_vectors(t, j, ranks[j]));
    proj.push_back({tk.factors.back().transpose(), j});
  }
  tk.core = multi_mode_product(t, proj);
  return tk;
}

TuckerTensor hosvd(const DenseTensor& t, std::size_t rank) {
  std::vector<std::size_t> ranks(t.order(), rank);
  return hosvd(t, ranks);
}

ModeFactorResult method1_factor(const DenseTensor& t, std::size_t mode,
                                std::size_t rank, std::size_t oversample,
                                std::uint64_t seed) {
  const std::size_t ell = checked_sketch_size(rank, oversample);
  if (mode >= t.order()) throw std::out_of_range("mode out of range");
  check_uniform_sketch(t.extents(), ell, "method1");
  const std::size_t cols = t.size() / t.extent(mode);
  if (ell > cols) {
    throw std::invalid_argument("method1: r + p exceeds unfolding width");
  }
  const Matrix omega = gaussian_matrix(static_cast<Eigen::Index>(cols),
                                       static_cast<Eigen::Index>(ell), seed, mode);
  RridResult res = interpolatory_rows(sketch_unfolding(t, mode, omega));
  return {std::move(res.factor), std::move(res.selected),
          static_cast<std::uint64_t>(omega.size())};
}

TuckerTensor method1(const DenseTensor& t, std::size_t rank,
                     std::size_t oversample, std::uint64_t seed) {
  TuckerTensor tk;
  std::vector<IndexSet> sets;
  for (std::size_t j = 0; j < t.order(); ++j) {
    ModeFactorResult res = method1_factor(t, j, rank, oversample, seed);
    tk.rng_draws += res.rng_draws;
    tk.factors.push_back(std::move(res.factor));
    sets.push_back(std::move(res.selected));
  }
  tk.core = subtensor(t, sets);
  tk.selected = std::move(sets);
  return tk;
}

ModeFactorResult method2_factor(EntrySource& src, std::size_t mode,
                                std::size_t rank, std::size_t oversample,
                                std::span<const IndexSet> sample_sets,
                                std::uint64_t seed) {
  const Extents& ext = src.extents();
  const std::size_t order = ext.size();
  const std::size_t ell = checked_sketch_size(rank, oversample);
  if (mode >= order) throw std::out_of_range("mode out of range");
  if (sample_sets.size() != order) {
    throw std::invalid_argument("method2: need one sample set per mode");
  }
  for (std::size_t k = 0; k < order; ++k) {
    if (sample_sets[k].empty() || sample_sets[k].parent_extent() != ext[k]) {
      throw std::invalid_argument("method2: sample set " + std::to_string(k) +
                                  " does not index mode extent " +
                                  std::to_string(ext[k]));
    }
  }
  check_uniform_sketch(ext, ell, "method2");

  Extents sub_ext(order);
  for (std::size_t k = 0; k < order; ++k) {
    sub_ext[k] = k == mode ? ext[k] : sample_sets[k].size();
  }
  DenseTensor x(sub_ext);
  const std::size_t cols = x.size() / ext[mode];
  if (ell > cols) {
    throw std::invalid_argument(
        "method2: r + p = " + std::to_string(ell) +
        " exceeds the subsampled unfolding width " + std::to_string(cols));
  }
  std::vector<std::size_t> sub(order), full(order);
  for (std::size_t lin = 0; lin < x.size(); ++lin) {
    x.multi_index(lin, sub);
    for (std::size_t k = 0; k < order; ++k) {
      full[k] = k == mode ? sub[k] : sample_sets[k].offset(sub[k]);
    }
    x[lin] = src.entry(full);
  }
  const Matrix omega = gaussian_matrix(static_cast<Eigen::Index>(cols),
                                       static_cast<Eigen::Index>(ell), seed, mode);
  RridResult res = interpolatory_rows(sketch_unfolding(x, mode, omega));
  return {std::move(res.factor), std::move(res.selected),
          static_cast<std::uint64_t>(omega.size())};
}

TuckerTensor method2(EntrySource& src, std::size_t rank, std::size_t oversample,
                     std::span<const IndexSet> sample_sets,
                     std::uint64_t seed) {
  TuckerTensor tk;
  std::vector<IndexSet> sets;
  for (std::size_t j = 0; j < src.extents().size(); ++j) {
    ModeFactorResult res =
        method2_factor(src, j, rank, oversample, sample_sets, seed);
    tk.rng_draws += res.rng_draws;
    tk.factors.push_back(std::move(res.factor));
    sets.push_back(std::move(res.selected));
  }
  tk.core = cross_core(src, sets);
  tk.selected = std::move(sets);
  return tk;
}

TuckerTensor method2(EntrySource& src, std::size_t rank, std::size_t oversample,
                     const IndexSet& sample_set, std::uint64_t seed) {
  std::vector<IndexSet> sets(src.extents().size(), sample_set);
  return method2(src, rank, oversample, sets, seed);
}

TuckerTensor method2(const DenseTensor& t, std::size_t rank,
                     std::size_t oversample, const IndexSet& sample_set,
                     std::uint64_t seed) {
  DenseSource src(t);
  return method2(src, rank, oversample, sample_set, seed);
}

Method3Sketch::Method3Sketch(const Extents& extents, std::size_t rank,
                             std::size_t oversample, std::uint64_t seed)
    : ell_(checked_sketch_size(rank, oversample)) {
  if (extents.size() < 2) {
    throw std::invalid_argument("method3: tensor order must be at least 2");
  }
  check_uniform_sketch(extents, ell_, "method3");
  max_extent_ = *std::max_element(extents.begin(), extents.end());
  for (std::size_t s = 0; s + 1 < extents.size(); ++s) {
    omegas_.push_back(gaussian_matrix(static_cast<Eigen::Index>(max_extent_),
                                      static_cast<Eigen::Index>(ell_), seed, s));
  }
}

std::uint64_t Method3Sketch::rng_draws() const {
  return static_cast<std::uint64_t>(omegas_.size() * max_extent_ * ell_);
}

ModeFactorResult Method3Sketch::factor(const DenseTensor& t,
                                       std::size_t mode) const {
  if (t.order() != omegas_.size() + 1) {
    throw std::invalid_argument("method3: sketch built for a different order");
  }
  if (mode >= t.order()) throw std::out_of_range("mode out of range");
  std::vector<ModeFactor> sketch;
  std::size_t s = 0;
  for (std::size_t k = 0; k < t.order(); ++k) {
    if (k == mode) continue;
    const auto rows = static_cast<Eigen::Index>(t.extent(k));
    sketch.push_back({omegas_[s++].topRows(rows).transpose(), k});
  }
  // X_(j) has l^(N-1) columns; its leading l left singular vectors give the
  // square Q(J,:) needed for the interpolatory factor.
  const DenseTensor x = multi_mode_product(t, sketch);
  RridResult res =
      interpolatory_from_basis(leading_left_singular_vectors(x, mode, ell_));
  return {std::move(res.factor), std::move(res.selected), 0};
}

TuckerTensor method3(const DenseTensor& t, std::size_t rank,
                     std::size_t oversample, std::uint64_t seed) {
  const Method3Sketch sk(t.extents(), rank, oversample, seed);
  TuckerTensor tk;
  tk.rng_draws = sk.rng_draws();
  std::vector<IndexSet> sets;
  for (std::size_t j = 0; j < t.order(); ++j) {
    ModeFactorResult res = sk.factor(t, j);
    tk.factors.push_back(std::move(res.factor));
    sets.push_back(std::move(res.selected));
  }
  tk.core = subtensor(t, sets);
  tk.selected = std::move(sets);
  return tk;
}

DenseTensor reconstruct(const TuckerTensor& tk) {
  tk.validate();
  std::vector<ModeFactor> f;
  for (std::size_t j = 0; j < tk.factors.size(); ++j) {
    f.push_back({tk.factors[j], j});
  }
  return multi_mode_product(tk.core, f);
}

double relative_error(const DenseTensor& t, const TuckerTensor& tk) {
  const double nrm = t.norm();
  if (nrm == 0.0) throw std::invalid_argument("relative_error: zero tensor");
  return frobenius_distance(t, reconstruct(tk)) / nrm;
}

}  // namespace tuckercheb
