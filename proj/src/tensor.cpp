#include "tuckercheb/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tuckercheb {

IndexSet::IndexSet(std::vector<std::size_t> indices, std::size_t parent_extent)
    : indices_(std::move(indices)), parent_extent_(parent_extent) {
  std::vector<bool> seen(parent_extent + 1, false);
  for (std::size_t idx : indices_) {
    if (idx < 1 || idx > parent_extent) {
      throw std::out_of_range("IndexSet: index " + std::to_string(idx) +
                              " outside [1, " + std::to_string(parent_extent) +
                              "]");
    }
    if (seen[idx]) {
      throw std::invalid_argument("IndexSet: duplicate index " +
                                  std::to_string(idx));
    }
    seen[idx] = true;
  }
}

IndexSet IndexSet::full(std::size_t extent) {
  std::vector<std::size_t> idx(extent);
  std::iota(idx.begin(), idx.end(), std::size_t{1});
  return IndexSet(std::move(idx), extent);
}

IndexSet IndexSet::from_zero_based(std::span<const std::size_t> offsets,
                                   std::size_t parent_extent) {
  std::vector<std::size_t> idx(offsets.begin(), offsets.end());
  for (auto& v : idx) ++v;
  return IndexSet(std::move(idx), parent_extent);
}

std::vector<std::size_t> IndexSet::zero_based() const {
  std::vector<std::size_t> out(indices_);
  for (auto& v : out) --v;
  return out;
}

std::size_t product(std::span<const std::size_t> extents) {
  return std::accumulate(extents.begin(), extents.end(), std::size_t{1},
                         std::multiplies<>());
}

namespace {

void check_extents(const Extents& extents) {
  if (extents.empty()) {
    throw std::invalid_argument("DenseTensor: order must be at least 1");
  }
  for (std::size_t e : extents) {
    if (e == 0) throw std::invalid_argument("DenseTensor: zero extent");
  }
}

void check_mode(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) {
    throw std::out_of_range("mode " + std::to_string(mode) +
                            " out of range for order-" +
                            std::to_string(t.order()) + " tensor");
  }
}

// Sizes of the blocks before and after a mode in the linear ordering.
std::pair<std::size_t, std::size_t> split_at(const Extents& e,
                                             std::size_t mode) {
  std::size_t left = 1, right = 1;
  for (std::size_t k = 0; k < mode; ++k) left *= e[k];
  for (std::size_t k = mode + 1; k < e.size(); ++k) right *= e[k];
  return {left, right};
}

}  // namespace

DenseTensor::DenseTensor(Extents extents) : extents_(std::move(extents)) {
  check_extents(extents_);
  values_.assign(product(extents_), 0.0);
}

DenseTensor::DenseTensor(Extents extents, std::vector<double> values)
    : extents_(std::move(extents)), values_(std::move(values)) {
  check_extents(extents_);
  if (values_.size() != product(extents_)) {
    throw std::invalid_argument("DenseTensor: value count " +
                                std::to_string(values_.size()) +
                                " does not match extents");
  }
}

std::size_t DenseTensor::linear_index(
    std::span<const std::size_t> index) const {
  std::size_t lin = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < extents_.size(); ++k) {
    lin += index[k] * stride;
    stride *= extents_[k];
  }
  return lin;
}

void DenseTensor::multi_index(std::size_t linear,
                              std::span<std::size_t> index) const {
  for (std::size_t k = 0; k < extents_.size(); ++k) {
    index[k] = linear % extents_[k];
    linear /= extents_[k];
  }
}

double DenseTensor::norm() const {
  return Eigen::Map<const Vector>(values_.data(),
                                  static_cast<Eigen::Index>(values_.size()))
      .norm();
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  check_mode(t, mode);
  const auto [left, right] = split_at(t.extents(), mode);
  const std::size_t n = t.extent(mode);
  Matrix m(static_cast<Eigen::Index>(n),
           static_cast<Eigen::Index>(left * right));
  const double* src = t.data();
  for (std::size_t r = 0; r < right; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* fiber = src + left * (i + n * r);
      for (std::size_t l = 0; l < left; ++l) {
        m(static_cast<Eigen::Index>(i),
          static_cast<Eigen::Index>(l + left * r)) = fiber[l];
      }
    }
  }
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Extents& extents) {
  DenseTensor t(extents);
  check_mode(t, mode);
  const auto [left, right] = split_at(extents, mode);
  const std::size_t n = extents[mode];
  if (static_cast<std::size_t>(m.rows()) != n ||
      static_cast<std::size_t>(m.cols()) != left * right) {
    throw std::invalid_argument("fold: matrix shape does not match extents");
  }
  double* dst = t.data();
  for (std::size_t r = 0; r < right; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      double* fiber = dst + left * (i + n * r);
      for (std::size_t l = 0; l < left; ++l) {
        fiber[l] = m(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(l + left * r));
      }
    }
  }
  return t;
}

Matrix unfold_first(const DenseTensor& t, std::size_t leading) {
  if (leading < 1 || leading >= t.order()) {
    throw std::out_of_range("unfold_first: leading mode count " +
                            std::to_string(leading) + " not in [1, " +
                            std::to_string(t.order() - 1) + "]");
  }
  const std::size_t rows =
      product(std::span(t.extents()).first(leading));
  return Eigen::Map<const Matrix>(t.data(), static_cast<Eigen::Index>(rows),
                                  static_cast<Eigen::Index>(t.size() / rows));
}

DenseTensor mode_product(const DenseTensor& t, const Matrix& a,
                         std::size_t mode) {
  check_mode(t, mode);
  const std::size_t n = t.extent(mode);
  if (static_cast<std::size_t>(a.cols()) != n) {
    throw std::invalid_argument(
        "mode_product: matrix has " + std::to_string(a.cols()) +
        " columns, mode " + std::to_string(mode) + " has extent " +
        std::to_string(n));
  }
  if (a.rows() == 0) throw std::invalid_argument("mode_product: empty matrix");
  const auto [left, right] = split_at(t.extents(), mode);
  const auto m = static_cast<std::size_t>(a.rows());
  Extents out_ext = t.extents();
  out_ext[mode] = m;
  DenseTensor out(out_ext);
  const auto L = static_cast<Eigen::Index>(left);
  for (std::size_t r = 0; r < right; ++r) {
    Eigen::Map<const Matrix> slab(t.data() + r * left * n, L,
                                  static_cast<Eigen::Index>(n));
    Eigen::Map<Matrix> dst(out.data() + r * left * m, L,
                           static_cast<Eigen::Index>(m));
    dst.noalias() = slab * a.transpose();
  }
  return out;
}

DenseTensor multi_mode_product(const DenseTensor& t,
                               std::span<const ModeFactor> factors) {
  std::vector<bool> used(t.order(), false);
  for (const auto& f : factors) {
    check_mode(t, f.mode);
    if (used[f.mode]) {
      throw std::invalid_argument("multi_mode_product: duplicate mode " +
                                  std::to_string(f.mode));
    }
    used[f.mode] = true;
    if (static_cast<std::size_t>(f.matrix.cols()) != t.extent(f.mode)) {
      throw std::invalid_argument(
          "multi_mode_product: dimension mismatch in mode " +
          std::to_string(f.mode));
    }
  }
  std::vector<const ModeFactor*> order;
  order.reserve(factors.size());
  for (const auto& f : factors) order.push_back(&f);
  std::stable_sort(order.begin(), order.end(),
                   [](const ModeFactor* a, const ModeFactor* b) {
                     const double ra = double(a->matrix.rows()) /
                                       double(a->matrix.cols());
                     const double rb = double(b->matrix.rows()) /
                                       double(b->matrix.cols());
                     if (ra != rb) return ra < rb;
                     return a->mode < b->mode;
                   });
  DenseTensor out = t;
  for (const ModeFactor* f : order) out = mode_product(out, f->matrix, f->mode);
  return out;
}

DenseTensor subtensor(const DenseTensor& t, std::span<const IndexSet> sets) {
  if (sets.size() != t.order()) {
    throw std::invalid_argument("subtensor: need one index set per mode");
  }
  Extents ext(t.order());
  for (std::size_t k = 0; k < t.order(); ++k) {
    if (sets[k].empty()) throw std::invalid_argument("subtensor: empty set");
    for (std::size_t idx : sets[k].indices()) {
      if (idx < 1 || idx > t.extent(k)) {
        throw std::out_of_range("subtensor: index " + std::to_string(idx) +
                                " out of range in mode " + std::to_string(k));
      }
    }
    ext[k] = sets[k].size();
  }
  DenseTensor out(ext);
  std::vector<std::size_t> sub(t.order()), full(t.order());
  for (std::size_t lin = 0; lin < out.size(); ++lin) {
    out.multi_index(lin, sub);
    for (std::size_t k = 0; k < t.order(); ++k) full[k] = sets[k].offset(sub[k]);
    out[lin] = t(full);
  }
  return out;
}

Matrix rowwise_khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("rowwise_khatri_rao: row counts differ (" +
                                std::to_string(a.rows()) + " vs " +
                                std::to_string(b.rows()) + ")");
  }
  const Eigen::Index p = a.cols(), q = b.cols();
  Matrix out(a.rows(), p * q);
  for (Eigen::Index k = 0; k < p; ++k) {
    out.middleCols(k * q, q) = b.array().colwise() * a.col(k).array();
  }
  return out;
}

double frobenius_distance(const DenseTensor& a, const DenseTensor& b) {
  if (a.extents() != b.extents()) {
    throw std::invalid_argument("frobenius_distance: shape mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace tuckercheb
