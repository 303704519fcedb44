#include "tuckercheb/kernel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace tuckercheb {

namespace {

constexpr std::array<std::pair<std::string_view, KernelKind>, 9> kCatalog{{
    {"laplace3d", KernelKind::laplace3d},
    {"biharmonic", KernelKind::biharmonic},
    {"laplace2d", KernelKind::laplace2d},
    {"thinplate", KernelKind::thinplate},
    {"multiquadric", KernelKind::multiquadric},
    {"gaussian", KernelKind::gaussian},
    {"matern12", KernelKind::matern12},
    {"matern32", KernelKind::matern32},
    {"matern52", KernelKind::matern52},
}};

}  // namespace

KernelSpec KernelSpec::named(std::string_view name, double sigma) {
  for (const auto& [n, kind] : kCatalog) {
    if (n == name) {
      KernelSpec k{kind, sigma, {}};
      k.validate();
      return k;
    }
  }
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

std::string_view KernelSpec::name() const {
  for (const auto& [n, kind] : kCatalog) {
    if (kind == this->kind) return n;
  }
  return "?";
}

bool KernelSpec::singular_at_zero() const {
  switch (kind) {
    case KernelKind::laplace3d:
    case KernelKind::biharmonic:
    case KernelKind::laplace2d:
    case KernelKind::thinplate:
      return true;
    default:
      return false;
  }
}

void KernelSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("kernel scale sigma must be positive");
  }
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("kernel scales must be positive");
    }
  }
}

double KernelSpec::phi(double r) const {
  // Anisotropic distances are already scaled.
  const double t = scales.empty() ? r / sigma : r;
  switch (kind) {
    case KernelKind::laplace3d: return 1.0 / r;
    case KernelKind::biharmonic: return 1.0 / (r * r);
    case KernelKind::laplace2d: return -std::log(r);
    // r^2 log r -> 0 as r -> 0, but log(0) poisons the product.
    case KernelKind::thinplate: return r * r * std::log(r);
    case KernelKind::multiquadric: return std::sqrt(1.0 + t * t);
    case KernelKind::gaussian: return std::exp(-t * t);
    case KernelKind::matern12: return std::exp(-t);
    case KernelKind::matern32: {
      const double a = std::sqrt(3.0) * t;
      return (1.0 + a) * std::exp(-a);
    }
    case KernelKind::matern52: {
      const double a = std::sqrt(5.0) * t;
      return (1.0 + a + 5.0 / 3.0 * t * t) * std::exp(-a);
    }
  }
  return 0.0;
}

double KernelSpec::distance(const double* x, const double* y,
                            std::size_t dims) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < dims; ++j) {
    double d = x[j] - y[j];
    if (!scales.empty()) d /= scales[j];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double KernelSpec::operator()(std::span<const double> x,
                              std::span<const double> y) const {
  if (x.size() != y.size()) {
    throw std::invalid_argument("kernel: point dimensions differ");
  }
  if (!scales.empty() && scales.size() != x.size()) {
    throw std::invalid_argument("kernel: scale count does not match dimension");
  }
  return phi(distance(x.data(), y.data(), x.size()));
}

std::vector<std::string> kernel_names() {
  std::vector<std::string> out;
  for (const auto& [n, kind] : kCatalog) out.emplace_back(n);
  return out;
}

Matrix dense_kernel_matrix(const Matrix& x, const Matrix& y,
                           const KernelSpec& k) {
  if (x.cols() != y.cols()) {
    throw std::invalid_argument("dense_kernel_matrix: point dimensions differ");
  }
  const auto dims = static_cast<std::size_t>(x.cols());
  if (!k.scales.empty() && k.scales.size() != dims) {
    throw std::invalid_argument("kernel: scale count does not match dimension");
  }
  // Row-major copies keep each point contiguous.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>;
  const RowMajor xr = x, yr = y;
  Matrix out(x.rows(), y.rows());
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double r = k.distance(xr.row(i).data(), yr.row(j).data(), dims);
      if (r == 0.0 && k.singular_at_zero()) {
        throw std::invalid_argument(
            "dense_kernel_matrix: kernel '" + std::string(k.name()) +
            "' is singular at coincident points (source " + std::to_string(i) +
            ", target " + std::to_string(j) + ")");
      }
      out(i, j) = k.phi(r);
    }
  }
  return out;
}

}  // namespace tuckercheb
