#pragma once

#include "tuckercheb/tensor.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace tuckercheb {

/// Identifier written into result provenance. Bump the version suffix if the
/// mapping from (seed, stream, index) to variates ever changes.
inline constexpr std::string_view kRngName = "philox4x32-10/box-muller/v1";

/// Philox4x32 with 10 rounds (Salmon et al., counter-based).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] Counter operator()(Counter ctr) const;

 private:
  Key key_;
};

/// Random access into a stream of standard normal variates.
///
/// Variate `index` of stream `stream` under `seed` is a pure function of the
/// triple: block index/2 is the Philox counter (low words) and the stream id
/// fills the high words, so distinct streams never share blocks.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream)
      : gen_(seed), stream_(stream) {}

  [[nodiscard]] double at(std::uint64_t index) const;

  /// Fills a rows x cols matrix column-major from consecutive indices
  /// starting at `first`.
  [[nodiscard]] Matrix matrix(Eigen::Index rows, Eigen::Index cols,
                              std::uint64_t first = 0) const;

 private:
  [[nodiscard]] std::array<double, 2> pair(std::uint64_t block) const;

  Philox4x32 gen_;
  std::uint64_t stream_;
};

/// Random access into a stream of uniform variates in [0, 1).
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t stream)
      : gen_(seed), stream_(stream) {}

  [[nodiscard]] double at(std::uint64_t index) const;

 private:
  Philox4x32 gen_;
  std::uint64_t stream_;
};

}  // namespace tuckercheb
