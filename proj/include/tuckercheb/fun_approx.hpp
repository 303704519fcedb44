#pragma once

#include "tuckercheb/chebyshev.hpp"
#include "tuckercheb/tucker.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tuckercheb {

/// Hyperrectangle [a_1,b_1] x ... x [a_N,b_N].
class Domain {
 public:
  explicit Domain(std::vector<Interval> intervals);
  /// The same interval in every one of `dims` dimensions.
  static Domain cube(std::size_t dims, Interval iv);

  [[nodiscard]] std::size_t dims() const { return intervals_.size(); }
  [[nodiscard]] const std::vector<Interval>& intervals() const {
    return intervals_;
  }
  [[nodiscard]] const Interval& operator[](std::size_t k) const {
    return intervals_[k];
  }
  [[nodiscard]] bool contains(std::span<const double> point) const;

  bool operator==(const Domain&) const = default;

 private:
  std::vector<Interval> intervals_;
};

std::vector<ChebGrid> make_grids(const Domain& domain, std::size_t n);

/// A black-box f: R^N -> R with an evaluation counter and a memo of values
/// already taken on Chebyshev grids.
///
/// The memo is keyed by (grid, multi-index); `eval_count()` only grows on
/// misses. Safe for concurrent lookups and insertions.
class CountedFunction {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  CountedFunction(Fn f, std::size_t dims);

  [[nodiscard]] std::size_t dims() const { return dims_; }
  [[nodiscard]] std::uint64_t eval_count() const { return count_.load(); }

  /// f at the grid point with 0-based multi-index `index`. Non-finite values
  /// raise NumericalError.
  double at_grid(std::span<const ChebGrid> grids,
                 std::span<const std::size_t> index);

  /// Uncounted, unmemoized evaluation.
  [[nodiscard]] double raw(std::span<const double> x) const { return f_(x); }

 private:
  using GridKey = std::vector<double>;

  Fn f_;
  std::size_t dims_;
  std::atomic<std::uint64_t> count_{0};
  std::mutex mutex_;
  std::map<GridKey, std::unordered_map<std::uint64_t, double>> memo_;
};

/// EntrySource view of f on the tensor grid.
class GridSource final : public EntrySource {
 public:
  GridSource(CountedFunction& f, std::vector<ChebGrid> grids);
  [[nodiscard]] const Extents& extents() const override { return extents_; }
  [[nodiscard]] double entry(std::span<const std::size_t> index) override {
    return f_->at_grid(grids_, index);
  }

 private:
  CountedFunction* f_;
  std::vector<ChebGrid> grids_;
  Extents extents_;
};

/// How Method 2 picks its n / 3^levels sampled indices per mode.
///  nested:  the indices whose nodes form the coarse Chebyshev grid. That grid
///           is symmetric about the midpoint, so fibers of even or odd
///           functions repeat and the sampled range collapses.
///  shifted: the nested indices moved down by one node. Same stride and
///           count; no two selected nodes are mirror images.
enum class SampleRule { shifted, nested };

std::string_view sample_rule_name(SampleRule r);
SampleRule parse_sample_rule(std::string_view name);

struct InterpolantConfig {
  std::size_t n = 16;
  Method method = Method::m1;
  std::size_t rank = 5;
  std::size_t oversample = 5;
  /// Method 2 keeps n / 3^levels sampled indices per mode; 0 keeps all.
  std::size_t subsample_levels = 0;
  SampleRule sample_rule = SampleRule::shifted;
  std::uint64_t seed = 0;

  /// Core extent per mode.
  [[nodiscard]] std::size_t core_rank() const { return rank + oversample; }
};

/// Sampled indices used by Method 2 for an n-point grid.
IndexSet method2_sample_set(std::size_t n, std::size_t levels,
                            SampleRule rule = SampleRule::shifted);

/// f-hat(x) = G x_k (s_k(x_k) A_k).
struct CompressedInterpolant {
  Domain domain;
  InterpolantConfig config;
  std::vector<ChebGrid> grids;
  TuckerTensor tucker;

  [[nodiscard]] double operator()(std::span<const double> point) const;
};

/// M(j_1..j_N) = f(eta_{j_1}, ..., eta_{j_N}).
DenseTensor build_full_tensor(CountedFunction& f, const Domain& domain,
                              std::size_t n);

/// Compresses the coefficient tensor with the configured method. Method 2
/// reads only sampled fibers plus the core cross; the others build the full
/// tensor first.
CompressedInterpolant build_interpolant(CountedFunction& f, const Domain& domain,
                                        const InterpolantConfig& cfg);

/// Uncompressed interpolant (identity factors around the full tensor).
CompressedInterpolant full_interpolant(CountedFunction& f, const Domain& domain,
                                       std::size_t n);

double evaluate(const CompressedInterpolant& ip, std::span<const double> point);

/// max |f - ip| / max |f| over `count` uniform points in the domain.
double sample_error(const CountedFunction::Fn& f, const CompressedInterpolant& ip,
                    std::size_t count, std::uint64_t seed);

/// Uniform points in the domain, one per row.
Matrix uniform_points(const Domain& domain, std::size_t count,
                      std::uint64_t seed);

/// Text container with hex-float values; round trip is bit exact.
void write_interpolant(std::ostream& os, const CompressedInterpolant& ip);
CompressedInterpolant read_interpolant(std::istream& is);

}  // namespace tuckercheb
