#include "deou/simulate.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

using namespace deou;
using deou::testing::kReferenceH;
using deou::testing::reference_params;

namespace {

struct Summary {
  double mean = 0.0;
  double var = 0.0;
  double m3c = 0.0;  // third central moment
  double m4c = 0.0;  // fourth central moment
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& x) {
  Summary s;
  s.n = x.size();
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  for (double v : x) {
    const double d = v - s.mean;
    s.var += d * d;
    s.m3c += d * d * d;
    s.m4c += d * d * d * d;
  }
  s.var /= static_cast<double>(s.n);
  s.m3c /= static_cast<double>(s.n);
  s.m4c /= static_cast<double>(s.n);
  return s;
}

bool within_4se_mean(const Summary& s, double expected) {
  return std::fabs(s.mean - expected) <= 4.0 * std::sqrt(s.var / static_cast<double>(s.n));
}

bool within_4se_var(const Summary& s, double expected) {
  return std::fabs(s.var - expected) <= 4.0 * std::sqrt((s.m4c - s.var * s.var) / static_cast<double>(s.n));
}

}  // namespace

TEST_CASE("double-exponential draws") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) REQUIRE(draw_double_exp(1.0, 1.2, 1.6, rng) >= 0.0);

  std::vector<double> x(1000000);
  for (auto& v : x) v = draw_double_exp(0.6, 1.2, 1.6, rng);
  CHECK(within_4se_mean(summarize(x), 0.6 / 1.2 - 0.4 / 1.6));

  for (auto& v : x) v = draw_double_exp(0.5, 2.0, 2.0, rng);
  const auto s = summarize(x);
  // Sample third central moment against its own standard error.
  double v3 = 0.0;
  for (double v : x) {
    const double c = (v - s.mean) * (v - s.mean) * (v - s.mean) - s.m3c;
    v3 += c * c;
  }
  v3 /= static_cast<double>(x.size());
  CHECK(std::fabs(s.m3c) <= 4.0 * std::sqrt(v3 / static_cast<double>(x.size())));
}

TEST_CASE("jump sum vanishes when lambda h is negligible") {
  auto m = reference_params();
  m.lambda = 1e-10;
  Rng rng(5);
  for (int i = 0; i < 100000; ++i) REQUIRE(draw_transition_jump_sum(m, 0.01, rng) == 0.0);
}

TEST_CASE("one-step transition law from a fixed state") {
  const auto m = reference_params();
  const auto mom = analytic_moments(m, kReferenceH);
  const double var = mom.m2 - mom.m1 * mom.m1;
  const double decay = std::exp(-m.theta * kReferenceH);
  const double x = 1.5;

  Rng rng(9);
  std::vector<double> next(400000);
  for (auto& v : next) v = x * decay + draw_transition_jump_sum(m, kReferenceH, rng);
  const auto s = summarize(next);
  CHECK(within_4se_mean(s, x * decay + mom.m1 * (1.0 - decay)));
  CHECK(within_4se_var(s, var * (1.0 - decay * decay)));
}

TEST_CASE("jump sum law does not depend on position in the stream") {
  const auto m = reference_params();
  Rng rng(21);
  std::vector<double> early(300000), late(300000);
  for (auto& v : early) v = draw_transition_jump_sum(m, 0.2, rng);
  for (int i = 0; i < 1000000; ++i) (void)rng.next();
  for (auto& v : late) v = draw_transition_jump_sum(m, 0.2, rng);
  const auto a = summarize(early);
  const auto b = summarize(late);
  const double n = static_cast<double>(a.n);
  CHECK(std::fabs(a.mean - b.mean) <= 4.0 * std::sqrt((a.var + b.var) / n));
  CHECK(std::fabs(a.var - b.var) <= 4.0 * std::sqrt((a.m4c - a.var * a.var + b.m4c - b.var * b.var) / n));
}

TEST_CASE("no-jump path decays deterministically") {
  auto m = reference_params();
  m.lambda = 1e-12;
  SimulationOptions o;
  o.x0 = 1.0;
  o.h = 0.05;
  o.n = 200;
  o.burn_in = 0;
  const auto path = simulate_path(m, o);
  REQUIRE(path.size() == 200);
  for (std::size_t j = 0; j < path.size(); ++j) {
    CHECK(path.values[j] == doctest::Approx(std::exp(-m.theta * 0.05 * static_cast<double>(j + 1))).epsilon(1e-12));
  }
}

TEST_CASE("stationary path mean") {
  const auto m = reference_params();
  SimulationOptions o;
  o.h = kReferenceH;
  o.n = 3000;
  o.seed = 1;
  const auto path = simulate_path(m, o);
  CHECK(path.burn_in == default_burn_in(2.0, kReferenceH));
  CHECK(path.burn_in == 250);
  double mean = 0.0;
  for (double v : path.values) mean += v;
  mean /= static_cast<double>(path.size());
  const auto mom = analytic_moments(m, kReferenceH);
  // Long-run variance of an AR(1)-correlated sequence: var (1 + r) / (1 - r).
  const double r = std::exp(-m.theta * kReferenceH);
  const double lr_var = (mom.m2 - mom.m1 * mom.m1) * (1.0 + r) / (1.0 - r);
  CHECK(std::fabs(mean - 0.125) <= 4.0 * std::sqrt(lr_var / 3000.0));
}

TEST_CASE("seeded determinism and argument checks") {
  const auto m = reference_params();
  SimulationOptions o;
  o.n = 500;
  o.seed = 77;
  const auto a = simulate_path(m, o);
  const auto b = simulate_path(m, o);
  CHECK(a.values == b.values);
  o.stream = 1;
  CHECK(simulate_path(m, o).values != a.values);

  o.n = 0;
  CHECK_THROWS_AS(simulate_path(m, o), std::invalid_argument);
  o.n = 1;
  CHECK_THROWS_AS(simulate_path(m, o), std::invalid_argument);
  o.n = 10;
  o.h = 0.0;
  CHECK_THROWS_AS(simulate_path(m, o), std::invalid_argument);
  o.h = -0.1;
  CHECK_THROWS_AS(simulate_path(m, o), std::invalid_argument);
}
