#include "deou/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace deou {

std::uint64_t default_burn_in(double theta, double h) {
  return static_cast<std::uint64_t>(std::ceil(10.0 / (theta * h)));
}

double draw_double_exp(double p, double eta, double phi, Rng& rng) {
  if (rng.uniform() < p) return rng.exponential(eta);
  return -rng.exponential(phi);
}

double draw_transition_jump_sum(const ModelParams& params, double h, Rng& rng) {
  const std::uint64_t jumps = rng.poisson(params.lambda * h);
  const double theta_h = params.theta * h;
  double total = 0.0;
  for (std::uint64_t k = 0; k < jumps; ++k) {
    const double scale = std::exp(theta_h * rng.uniform());
    total += params.sigma * draw_double_exp(params.p, params.eta * scale, params.phi * scale, rng);
  }
  return total;
}

SamplePath simulate_path(const ModelParams& params, const SimulationOptions& options) {
  params.validate();
  if (options.n < 2) throw std::invalid_argument("simulate_path: n must be >= 2");
  if (!(options.h > 0.0) || !std::isfinite(options.h)) {
    throw std::invalid_argument("simulate_path: h must be > 0");
  }
  if (!std::isfinite(options.x0)) throw std::invalid_argument("simulate_path: x0 must be finite");

  SamplePath path;
  path.h = options.h;
  path.x0 = options.x0;
  path.seed = options.seed;
  path.stream = options.stream;
  path.burn_in = options.burn_in.value_or(default_burn_in(params.theta, options.h));
  path.values.reserve(options.n);

  Rng rng(options.seed, options.stream);
  const double decay = std::exp(-params.theta * options.h);
  double x = options.x0;
  for (std::uint64_t step = 0; step < path.burn_in; ++step) {
    x = x * decay + draw_transition_jump_sum(params, options.h, rng);
  }
  for (std::size_t j = 0; j < options.n; ++j) {
    x = x * decay + draw_transition_jump_sum(params, options.h, rng);
    path.values.push_back(x);
  }
  return path;
}

}  // namespace deou
