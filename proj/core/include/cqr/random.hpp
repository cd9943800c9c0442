#pragma once

#include <cstdint>

namespace cqr {

/// SplitMix64 output function.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based generator: draw k of stream s under seed depends only on
/// (seed, s, k), so replicate r gets the same numbers whatever the replicate
/// count or the order in which threads pick up work.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform() noexcept;
  /// Standard exponential by inversion.
  double exponential() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cqr
