#include "cqr/random.hpp"

#include <cmath>

namespace cqr {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed + kGolden) ^ (stream * kGolden + 0x632be59bd9b4e019ULL))) {}

std::uint64_t StreamRng::next() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double StreamRng::uniform() noexcept {
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double StreamRng::exponential() noexcept { return -std::log1p(-uniform()); }

}  // namespace cqr
