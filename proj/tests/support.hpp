#pragma once

// Helpers shared by the unit tests. Random data here comes from std::mt19937
// so that test fixtures never depend on the library's own generator.

#include "tuckercheb/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testing_support {

using tuckercheb::DenseTensor;
using tuckercheb::Extents;
using tuckercheb::Matrix;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols,
                            std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = nd(gen);
  return m;
}

inline DenseTensor random_tensor(const Extents& ext, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  DenseTensor t(ext);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = nd(gen);
  return t;
}

// Multi-index of a linear position, mode 0 fastest. Written independently of
// DenseTensor::multi_index.
inline std::vector<std::size_t> digits(std::size_t lin, const Extents& ext) {
  std::vector<std::size_t> idx(ext.size());
  for (std::size_t k = 0; k < ext.size(); ++k) {
    idx[k] = lin % ext[k];
    lin /= ext[k];
  }
  return idx;
}

// Core times factors by explicit summation over every core entry.
inline DenseTensor naive_tucker(const DenseTensor& core,
                                const std::vector<Matrix>& factors) {
  Extents ext;
  for (const auto& a : factors) ext.push_back(std::size_t(a.rows()));
  DenseTensor out(ext);
  for (std::size_t o = 0; o < out.size(); ++o) {
    const auto oi = digits(o, ext);
    double acc = 0.0;
    for (std::size_t c = 0; c < core.size(); ++c) {
      const auto ci = digits(c, core.extents());
      double w = core[c];
      for (std::size_t k = 0; k < ext.size(); ++k)
        w *= factors[k](Eigen::Index(oi[k]), Eigen::Index(ci[k]));
      acc += w;
    }
    out[o] = acc;
  }
  return out;
}

// Tensor of exact multirank (r,...,r): random core times random factors.
inline DenseTensor low_rank_tensor(const Extents& ext, std::size_t r,
                                   std::uint32_t seed) {
  DenseTensor core = random_tensor(Extents(ext.size(), r), seed);
  std::vector<Matrix> f;
  for (std::size_t k = 0; k < ext.size(); ++k)
    f.push_back(random_matrix(Eigen::Index(ext[k]), Eigen::Index(r),
                              seed + 101 * std::uint32_t(k + 1)));
  return naive_tucker(core, f);
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
