#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace ringml {

// Counter-based uniform stream. Every draw is a pure function of its key, so
// results do not depend on processing order or thread count.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Disjoint sub-streams of one run seed.
enum class NoiseStream : std::uint64_t {
  kImpute = 1,
  kInject = 2,
  kSynth = 3,
  kSplit = 4,
  kTest = 99,
};

inline std::uint64_t noise_key(std::uint64_t seed, NoiseStream stream, std::uint64_t a,
                               std::uint64_t b, std::uint64_t c) {
  std::uint64_t k = splitmix64(seed ^ 0x8f1bbcdcbfa53e0bULL);
  k = splitmix64(k ^ static_cast<std::uint64_t>(stream));
  k = splitmix64(k ^ a);
  k = splitmix64(k ^ b);
  k = splitmix64(k ^ c);
  return k;
}

/// Uniform in [0, 1).
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform in (0, 1]; safe as the log argument of Box-Muller.
inline double unit_uniform_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// The (U1, U2) pair for one keyed draw; U1 in (0,1], U2 in [0,1).
inline std::pair<double, double> uniform_pair(std::uint64_t seed, NoiseStream stream,
                                              std::uint64_t a, std::uint64_t b,
                                              std::uint64_t c) {
  const std::uint64_t k = noise_key(seed, stream, a, b, c);
  return {unit_uniform_open(splitmix64(k ^ 1)), unit_uniform(splitmix64(k ^ 2))};
}

/// One keyed uniform in [0, 1).
inline double uniform_one(std::uint64_t seed, NoiseStream stream, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  return unit_uniform(splitmix64(noise_key(seed, stream, a, b, c) ^ 3));
}

/// N(0, sigma^2) sample via the Box-Muller transform.
inline double box_muller(double u1, double u2, double sigma) {
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2) * sigma;
}

/// Standard normal sample for a key.
inline double normal_one(std::uint64_t seed, NoiseStream stream, std::uint64_t a,
                         std::uint64_t b, std::uint64_t c) {
  const auto [u1, u2] = uniform_pair(seed, stream, a, b, c);
  return box_muller(u1, u2, 1.0);
}

}  // namespace ringml
