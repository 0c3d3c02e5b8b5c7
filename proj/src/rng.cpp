#include "qtraj/rng.hpp"

#include <cmath>

#include "qtraj/linalg.hpp"

namespace qtraj {
namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

CounterRng CounterRng::stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t k = mix64(seed ^ 0x243F6A8885A308D3ULL);
  k = mix64(k + kGamma * (a + 1));
  k = mix64(k ^ (0x13198A2E03707344ULL + kGamma * (b + 1)));
  return CounterRng(k);
}

CounterRng::result_type CounterRng::operator()() {
  return mix64(key_ + kGamma * (++counter_));
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace qtraj
