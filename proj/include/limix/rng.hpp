#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace limix {

// All randomness goes through mt19937_64 plus the hand-rolled transforms
// below. std::normal_distribution is implementation-defined, so it is not
// used anywhere; this keeps every stream bit-reproducible for a given seed.
using RngEngine = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed from a base seed and a tag path, e.g.
// derive_seed(run_seed, {task, kGateTag}).
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t t : tags) s = splitmix64(s ^ (t + 0x9e3779b97f4a7c15ULL));
  return s;
}

// Uniform in [0, 1).
inline double uniform01(RngEngine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1]; safe for log().
inline double uniform01_open(RngEngine& g) {
  return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

// Standard normal via Box-Muller (uncached: two engine draws per call).
inline double normal01(RngEngine& g) {
  const double u1 = uniform01_open(g);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// Uniform integer in [0, n).
inline int uniform_int(RngEngine& g, int n) {
  return static_cast<int>(g() % static_cast<std::uint64_t>(n));
}

}  // namespace limix
