#pragma once

#include <cstdint>
#include <limits>

namespace qtraj {

// Counter-based generator: output k is a bijective 64-bit mix of key + k * gamma.
// Distinct (seed, stream) pairs give statistically independent streams, so a
// trajectory's draws depend only on its index, never on scheduling.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  // Stream for (seed, a, b); e.g. (experiment_seed, circuit_instance, trajectory).
  static CounterRng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal (Box-Muller, no caching so state is just the counter).
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace qtraj
