#include "tuckercheb/random.hpp"

#include <cmath>
#include <numbers>

namespace tuckercheb {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = std::uint64_t{a} * std::uint64_t{b};
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53 random bits -> (0, 1], never zero so log() stays finite.
inline double open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((std::uint64_t{hi} << 32) | std::uint64_t{lo}) >> 11;
  return (double(bits) + 1.0) * 0x1.0p-53;
}

Philox4x32::Counter make_counter(std::uint64_t block, std::uint64_t stream) {
  return {static_cast<std::uint32_t>(block),
          static_cast<std::uint32_t>(block >> 32),
          static_cast<std::uint32_t>(stream),
          static_cast<std::uint32_t>(stream >> 32)};
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const {
  Key key = key_;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::array<double, 2> NormalStream::pair(std::uint64_t block) const {
  const auto w = gen_(make_counter(block, stream_));
  const double u1 = open_unit(w[0], w[1]);
  const double u2 = open_unit(w[2], w[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double NormalStream::at(std::uint64_t index) const {
  return pair(index / 2)[index % 2];
}

Matrix NormalStream::matrix(Eigen::Index rows, Eigen::Index cols,
                            std::uint64_t first) const {
  Matrix m(rows, cols);
  double* out = m.data();
  const auto total = static_cast<std::uint64_t>(rows * cols);
  std::uint64_t k = 0;
  if (first % 2 == 1 && total > 0) {
    out[k++] = at(first);
  }
  for (; k + 1 < total; k += 2) {
    const auto z = pair((first + k) / 2);
    out[k] = z[0];
    out[k + 1] = z[1];
  }
  if (k < total) out[k] = at(first + k);
  return m;
}

double UniformStream::at(std::uint64_t index) const {
  const auto w = gen_(make_counter(index / 2, stream_));
  const std::uint64_t bits =
      index % 2 == 0
          ? ((std::uint64_t{w[0]} << 32) | w[1]) >> 11
          : ((std::uint64_t{w[2]} << 32) | w[3]) >> 11;
  return double(bits) * 0x1.0p-53;
}

}  // namespace tuckercheb
