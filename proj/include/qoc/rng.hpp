#pragma once

// Deterministic random streams. Stream k of a master seed is an mt19937_64
// whose seed is a splitmix64 hash of (master, k), so any trajectory or
// restart can be regenerated in isolation and results cannot depend on
// scheduling. Variate transforms are written out explicitly (53-bit uniforms,
// Box-Muller normals) to stay bit-stable across standard libraries.

#include <cmath>
#include <cstdint>
#include <random>

namespace qoc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 rng_stream(std::uint64_t master, std::uint64_t k) {
  return std::mt19937_64(splitmix64(splitmix64(master) ^ (k + 0x632be59bd9b4e019ULL)));
}

// uniform in (0, 1]
inline double uni01(std::mt19937_64& g) {
  return (double((g() >> 11)) + 1.0) / 9007199254740992.0;
}

inline double uniform(std::mt19937_64& g, double a, double b) {
  return a + (b - a) * uni01(g);
}

inline double normal01(std::mt19937_64& g) {
  const double u1 = uni01(g), u2 = uni01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

}  // namespace qoc
