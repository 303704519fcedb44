#pragma once

#include "tuckercheb/chebyshev.hpp"
#include "tuckercheb/fun_approx.hpp"
#include "tuckercheb/kernel.hpp"
#include "tuckercheb/tucker.hpp"

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace tuckercheb {

/// Axis-aligned box [a_1,b_1] x ... x [a_D,b_D].
class BoundingBox {
 public:
  explicit BoundingBox(std::vector<Interval> intervals);

  [[nodiscard]] std::size_t dims() const { return intervals_.size(); }
  [[nodiscard]] const std::vector<Interval>& intervals() const {
    return intervals_;
  }
  [[nodiscard]] const Interval& operator[](std::size_t j) const {
    return intervals_[j];
  }
  [[nodiscard]] bool contains(std::span<const double> point) const;
  /// Every row of `points` inside the box.
  [[nodiscard]] bool contains_all(const Matrix& points) const;

  bool operator==(const BoundingBox&) const = default;

 private:
  std::vector<Interval> intervals_;
};

/// Smallest box holding every row; flat directions are widened by `pad`
/// on both sides (and always by at least a tiny amount).
BoundingBox bounding_box(const Matrix& points, double pad = 0.0);

double diam(const BoundingBox& b);
/// Minimum distance between the boxes; 0 when they overlap.
double dist(const BoundingBox& a, const BoundingBox& b);
/// max(diam a, diam b) <= eta * dist(a, b), and false when dist is 0.
bool is_strongly_admissible(const BoundingBox& a, const BoundingBox& b,
                            double eta);

/// Source box [0,L]^D at the origin and a target box of side L whose lower
/// corner sits at distance `separation` from the origin: along angle theta
/// in the x-y plane for D = 2, along the diagonal for D = 3, along x for D = 1.
std::pair<BoundingBox, BoundingBox> experiment_boxes(double side,
                                                     double separation,
                                                     double theta,
                                                     std::size_t dims);

/// `count` uniform points in the box, one per row, from UniformStream(seed,
/// stream).
Matrix uniform_points_in_box(const BoundingBox& box, std::size_t count,
                             std::uint64_t seed, std::uint64_t stream);

/// Row i of U_j is s_vector(grid_j, point_i[j]); with `a` given, returns
/// U_j * a[j] instead. Points outside the box are rejected.
std::vector<Matrix> build_factors(const Matrix& points, const BoundingBox& box,
                                  std::span<const ChebGrid> grids,
                                  const std::vector<Matrix>* a = nullptr);

/// Explicit F = U_D kr ... kr U_1 from the first `count` factors (all by
/// default); a single column of ones when count is 0.
Matrix khatri_rao_rows(const std::vector<Matrix>& factors,
                       std::size_t count = static_cast<std::size_t>(-1));

struct LowRankConfig {
  std::size_t n = 27;
  Method method = Method::m1;
  std::size_t rank = 5;
  std::size_t oversample = 5;
  /// Method 2 samples n / 3^levels fibers per mode; 0 keeps all.
  std::size_t subsample_levels = 1;
  SampleRule sample_rule = SampleRule::shifted;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t core_rank() const { return rank + oversample; }
};

/// Largest n^(2D) coefficient tensor the dense methods will build.
inline constexpr std::size_t kMaxDenseEntries = std::size_t{1} << 26;

/// K(X, Y) ~= F_s M F_t^T with F_s = Uhat_D kr ... kr Uhat_1,
/// F_t = Vhat_D kr ... kr Vhat_1 and M = unfold_first(G, D).
struct LowRankKernel {
  KernelSpec kernel;
  BoundingBox source_box;
  BoundingBox target_box;
  LowRankConfig config;
  bool symmetric = false;
  /// Order-2D Tucker form of the coefficient tensor; A_{j+D} == A_j when
  /// symmetric.
  TuckerTensor tucker;
  std::vector<Matrix> source_factors;
  std::vector<Matrix> target_factors;
  /// Distinct kernel values read while building.
  std::uint64_t kernel_evals = 0;

  [[nodiscard]] std::size_t dims() const { return source_box.dims(); }
  [[nodiscard]] Eigen::Index rows() const { return source_factors[0].rows(); }
  [[nodiscard]] Eigen::Index cols() const { return target_factors[0].rows(); }
  [[nodiscard]] Matrix core_matrix() const;
};

/// K(X, Y) ~= U diag(s) V^T.
struct SvdKernel {
  Matrix u;
  Vector s;
  Matrix v;
};

LowRankKernel kernel_lowrank(const Matrix& x, const Matrix& y,
                             const BoundingBox& source_box,
                             const BoundingBox& target_box,
                             const KernelSpec& kernel, const LowRankConfig& cfg);

/// K(X, X) with one set of factors shared by sources and targets. The kernel
/// must be finite at r = 0.
LowRankKernel symmetric_lowrank(const Matrix& x, const BoundingBox& box,
                                const KernelSpec& kernel,
                                const LowRankConfig& cfg);

/// K-hat v without forming K-hat.
Vector apply(const LowRankKernel& lrk, const Vector& v);
/// K-hat^T w.
Vector transpose_apply(const LowRankKernel& lrk, const Vector& w);
Matrix to_dense(const LowRankKernel& lrk);

/// Thin QR of the explicit F_s and F_t, truncated SVD of R_s M R_t^T.
SvdKernel recompress(const LowRankKernel& lrk, std::size_t rank);
Vector apply(const SvdKernel& k, const Vector& v);
Matrix to_dense(const SvdKernel& k);

/// Randomized SVD (Gaussian sketch, `oversample` extra columns) of the
/// uncompressed Chebyshev form F_s M F_t^T.
SvdKernel chebyshev_randsvd(const Matrix& x, const Matrix& y,
                            const BoundingBox& source_box,
                            const BoundingBox& target_box,
                            const KernelSpec& kernel, std::size_t n,
                            std::size_t rank, std::size_t oversample,
                            std::uint64_t seed);

/// ||K - approx||_max / ||K||_max.
double max_norm_relative_error(const Matrix& k, const Matrix& approx);
double max_norm_relative_error(const Matrix& k, const LowRankKernel& lrk);
double max_norm_relative_error(const Matrix& k, const SvdKernel& svd);

/// |trace K - trace K-hat| / trace K, using only diagonals.
double trace_relative_error(const Matrix& x, const KernelSpec& kernel,
                            const LowRankKernel& lrk);

/// One point per line, comma separated; '#' comments, blank lines and one
/// non-numeric header line are skipped.
Matrix read_points_csv(std::istream& is);
void write_points_csv(std::ostream& os, const Matrix& points);

/// Provenance plus factors in the hex-float container format.
void write_lowrank(std::ostream& os, const LowRankKernel& lrk);
LowRankKernel read_lowrank(std::istream& is);

}  // namespace tuckercheb
