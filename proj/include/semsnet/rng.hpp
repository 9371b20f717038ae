#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace semsnet {

/// Seeded random source with platform-independent distributions.
///
/// The engine is mt19937_64; uniform and normal draws are derived from raw
/// engine output here instead of through <random> distributions, whose
/// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Derives an independent subseed for a named component:
/// splitmix64(root XOR fnv1a64(component)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view component);

/// Same as derive_seed with an additional integer index (trial, child, ...).
std::uint64_t derive_seed(std::uint64_t root, std::string_view component,
                          std::uint64_t index);

}  // namespace semsnet
