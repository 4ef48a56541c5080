#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace misbelief {

/// Counter-based generator: draw n is a pure function of (seed, n), so any
/// element of a stream can be regenerated without replaying the prefix.
/// The mixer is the SplitMix64 finalizer; normals come from Box-Muller pairs.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed, std::uint64_t counter = 0) noexcept
      : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)), counter_(counter) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits_at(std::uint64_t n) const noexcept {
    return mix(key_ + n * 0xd1342543de82ef95ULL);
  }

  /// Uniform on the open interval (0, 1).
  double uniform_at(std::uint64_t n) const noexcept {
    return (static_cast<double>(bits_at(n) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal number n of the stream.
  double normal_at(std::uint64_t n) const noexcept {
    const std::uint64_t pair = n >> 1;
    const double radius = std::sqrt(-2.0 * std::log(uniform_at(2 * pair)));
    const double angle = 2.0 * std::numbers::pi * uniform_at(2 * pair + 1);
    return (n & 1U) ? radius * std::sin(angle) : radius * std::cos(angle);
  }

  double uniform() noexcept { return uniform_at(counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept { return normal_at(counter_++); }

  /// Uniform integer in [lo, hi].
  long long integer(long long lo, long long hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long long>(bits_at(counter_++) % span);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace misbelief
