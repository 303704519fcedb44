#pragma once

#include "tuckercheb/rand_linalg.hpp"
#include "tuckercheb/tensor.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tuckercheb {

enum class Method { hosvd, m1, m2, m3 };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

/// [G; A_1, ..., A_N]. `selected` holds J_1..J_N for interpolatory methods.
struct TuckerTensor {
  DenseTensor core;
  std::vector<Matrix> factors;
  std::optional<std::vector<IndexSet>> selected;
  /// Gaussian variates drawn while building.
  std::uint64_t rng_draws = 0;

  [[nodiscard]] std::size_t order() const { return factors.size(); }
  [[nodiscard]] Extents ranks() const;
  /// Throws std::invalid_argument when factor and core shapes disagree.
  void validate() const;
};

/// Entry-wise access to a tensor that may never be materialized.
class EntrySource {
 public:
  virtual ~EntrySource() = default;
  [[nodiscard]] virtual const Extents& extents() const = 0;
  /// `index` is 0-based, one entry per mode.
  [[nodiscard]] virtual double entry(std::span<const std::size_t> index) = 0;
};

class DenseSource final : public EntrySource {
 public:
  explicit DenseSource(const DenseTensor& t) : t_(&t) {}
  [[nodiscard]] const Extents& extents() const override {
    return t_->extents();
  }
  [[nodiscard]] double entry(std::span<const std::size_t> index) override {
    return (*t_)(index);
  }

 private:
  const DenseTensor* t_;
};

/// Memoizing wrapper; `distinct_reads()` counts entries fetched from the
/// wrapped source.
class CountingSource final : public EntrySource {
 public:
  explicit CountingSource(EntrySource& inner) : inner_(&inner) {}
  [[nodiscard]] const Extents& extents() const override {
    return inner_->extents();
  }
  [[nodiscard]] double entry(std::span<const std::size_t> index) override;
  [[nodiscard]] std::uint64_t distinct_reads() const { return cache_.size(); }

 private:
  EntrySource* inner_;
  std::unordered_map<std::uint64_t, double> cache_;
};

/// One mode's interpolatory factor A_j with its index set J_j.
struct ModeFactorResult {
  Matrix factor;
  IndexSet selected;
  std::uint64_t rng_draws = 0;
};

/// Reads every entry of the source.
DenseTensor materialize(EntrySource& src);

/// Leading `rank` left singular vectors of unfold(t, mode).
Matrix leading_left_singular_vectors(const DenseTensor& t, std::size_t mode,
                                     std::size_t rank);

/// Singular values of unfold(t, mode), descending.
std::vector<double> mode_singular_values(const DenseTensor& t,
                                         std::size_t mode);

TuckerTensor hosvd(const DenseTensor& t, std::span<const std::size_t> ranks);
TuckerTensor hosvd(const DenseTensor& t, std::size_t rank);

/// T(J_1, ..., J_N) read through the source.
DenseTensor cross_core(EntrySource& src, std::span<const IndexSet> sets);

/// Mode-j step of Method 1: RRID of unfold(t, mode) with Gaussian stream `mode`.
ModeFactorResult method1_factor(const DenseTensor& t, std::size_t mode,
                                std::size_t rank, std::size_t oversample,
                                std::uint64_t seed);

/// Randomized interpolatory decomposition: an RRID of every unfolding, core
/// taken from the cross T(J_1, ..., J_N). Mode j sketches with stream j.
TuckerTensor method1(const DenseTensor& t, std::size_t rank,
                     std::size_t oversample, std::uint64_t seed);

/// Block-selection variant: mode j is sketched from the subtensor with every
/// other mode k restricted to sample_sets[k]. Only those fibers and the core
/// cross are read from `src`.
TuckerTensor method2(EntrySource& src, std::size_t rank, std::size_t oversample,
                     std::span<const IndexSet> sample_sets, std::uint64_t seed);
/// Mode-j step of Method 2.
ModeFactorResult method2_factor(EntrySource& src, std::size_t mode,
                                std::size_t rank, std::size_t oversample,
                                std::span<const IndexSet> sample_sets,
                                std::uint64_t seed);

/// Same sample set in every mode.
TuckerTensor method2(EntrySource& src, std::size_t rank, std::size_t oversample,
                     const IndexSet& sample_set, std::uint64_t seed);
TuckerTensor method2(const DenseTensor& t, std::size_t rank,
                     std::size_t oversample, const IndexSet& sample_set,
                     std::uint64_t seed);

/// Kronecker-structured sketch: N-1 Gaussian matrices shared across modes.
/// For mode j the remaining modes, in ascending order, take Omega_1..Omega_{N-1};
/// each Omega has max-extent rows and the first I_k rows are used.
class Method3Sketch {
 public:
  Method3Sketch(const Extents& extents, std::size_t rank,
                std::size_t oversample, std::uint64_t seed);
  /// Mode-j factor of a tensor with the extents given at construction.
  [[nodiscard]] ModeFactorResult factor(const DenseTensor& t,
                                        std::size_t mode) const;
  [[nodiscard]] std::uint64_t rng_draws() const;

 private:
  std::size_t ell_;
  std::size_t max_extent_ = 0;
  std::vector<Matrix> omegas_;
};

TuckerTensor method3(const DenseTensor& t, std::size_t rank,
                     std::size_t oversample, std::uint64_t seed);

DenseTensor reconstruct(const TuckerTensor& tk);

/// ||T - reconstruct(tk)||_F / ||T||_F.
double relative_error(const DenseTensor& t, const TuckerTensor& tk);

}  // namespace tuckercheb
