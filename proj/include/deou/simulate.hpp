#pragma once

// Exact simulation of the double-exponential OU process on a uniform grid.
//
// Over one step of length h the solution satisfies
//   X_{t+h} = e^{-theta h} X_t + sum_{k=1}^{N} S_k,   N ~ Poisson(lambda h),
// where each S_k, given its own U_k ~ U[0,1], is double-exponential with
// rates eta e^{theta h U_k} and phi e^{theta h U_k} (times sigma). The scheme
// has no discretisation error.

#include "deou/model.hpp"
#include "deou/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace deou {

struct SamplePath {
  double h = 0.0;
  double x0 = 0.0;
  std::vector<double> values;  // X_{t_1}, ..., X_{t_n}, t_j = j h
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t burn_in = 0;

  std::size_t size() const { return values.size(); }
};

struct SimulationOptions {
  double x0 = 0.0;
  double h = 0.02;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  // Steps discarded before the first retained observation. Defaults to
  // ceil(10 / (theta h)), i.e. ten mean-reversion times.
  std::optional<std::uint64_t> burn_in;
};

std::uint64_t default_burn_in(double theta, double h);

// One draw from p eta e^{-eta x} 1{x>=0} + (1-p) phi e^{phi x} 1{x<0}.
// p may be 0 or 1 here (degenerate one-sided laws).
double draw_double_exp(double p, double eta, double phi, Rng& rng);

// The jump contribution sum_{k<=N} S_k accumulated over one step of length h.
double draw_transition_jump_sum(const ModelParams& params, double h, Rng& rng);

// Throws std::invalid_argument for n < 2, h <= 0 or invalid params.
SamplePath simulate_path(const ModelParams& params, const SimulationOptions& options);

}  // namespace deou
