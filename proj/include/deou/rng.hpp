#pragma once

#include <array>
#include <cstdint>

namespace deou {

// xoshiro256++ seeded through SplitMix64. Streams are keyed by
// (seed, stream_id): the pair is hashed into the initial SplitMix64 state,
// so replication r of a run always sees the same sequence regardless of how
// many other replications exist or in which order they execute.
//
// Variates are built from raw 64-bit outputs only (no std:: distributions),
// which keeps paths bit-identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return next(); }
  std::uint64_t next();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Exponential with the given rate (> 0).
  double exponential(double rate);

  // Poisson with the given mean (>= 0). Inversion for mean <= 10, PTRS
  // transformed rejection above.
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t poisson_ptrs(double mean);

  std::array<std::uint64_t, 4> s_{};
};

}  // namespace deou
