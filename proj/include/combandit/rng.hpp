#pragma once

// Seeded randomness utilities. Every run owns one 64-bit base seed; the
// environment and the policy draw from disjoint streams derived from it
// (stream ids 1 and 2 below), so replaying either side in isolation
// reproduces the same values.

#include <cstdint>
#include <random>

namespace combandit {

// SplitMix64 step, used only to derive well-mixed seeds for the streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t stream_id) {
  std::uint64_t s = base_seed;
  std::uint64_t z = 0;
  for (std::uint64_t i = 0; i <= stream_id; ++i) z = splitmix64(s);
  return z;
}

constexpr std::uint64_t kEnvironmentStream = 1;
constexpr std::uint64_t kPolicyStream = 2;

inline std::mt19937_64 make_stream(std::uint64_t base_seed, std::uint64_t stream_id) {
  return std::mt19937_64(derive_stream_seed(base_seed, stream_id));
}

// Uniform double in [0,1) built from the top 53 bits; avoids the
// implementation-defined layout of std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& rng, double p) {
  return uniform01(rng) < p;
}

// Samples an index from a discrete distribution given by nonnegative
// weights summing to ~1; the tail index absorbs rounding slack.
template <typename WeightVec>
inline std::size_t sample_index(std::mt19937_64& rng, const WeightVec& weights) {
  double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  return weights.empty() ? 0 : weights.size() - 1;
}

}  // namespace combandit
