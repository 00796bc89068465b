#pragma once

#include <cstdint>
#include <random>

namespace spiralnet {

/// Mix a base seed with a stream index (vertex id, run index, epoch, ...).
/// All derived generators in the library go through this so that parallel
/// work stays reproducible: stream `i` always sees the same sequence no
/// matter which worker evaluates it.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream);

/// Seeded generator with implementation-independent sampling helpers.
/// std::mt19937_64 output is fully specified by the standard; the
/// distributions in <random> are not, so the helpers below are hand-written.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Fisher-Yates shuffle of any random-access range.
  template <typename Range>
  void shuffle(Range& range) {
    const auto n = static_cast<std::uint64_t>(std::size(range));
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = uniform_index(i);
      using std::swap;
      swap(range[i - 1], range[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spiralnet
