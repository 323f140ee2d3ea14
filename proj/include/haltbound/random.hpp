#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace haltbound {

/// Master seed of a run.
struct Seed {
  std::uint64_t value = 20190096;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the k-th output of stream (seed, stream) is
/// mix64(key + (k + 1) * golden), so any draw can be computed without the
/// ones before it and distinct streams never share state.
///
/// Normals use the Box-Muller transform on consecutive uniform pairs; the
/// cosine branch comes first. This choice is fixed so seeded results stay
/// stable across platforms and standard library versions.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  CounterRng(Seed seed, std::uint64_t stream) noexcept
      : key_(mix64(seed.value ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform in the open interval (0, 1).
  double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace haltbound
