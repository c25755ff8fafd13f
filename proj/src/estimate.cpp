#include "deou/estimate.hpp"

#include "deou/kernels.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <utility>

namespace deou {
namespace {

constexpr double kBracketWidth = 1e-14;
constexpr double kDerivativeStep = 1e-7;
constexpr std::uintmax_t kMaxRootIterations = 200;

[[noreturn]] void fail(EstimationErrorKind kind, const char* stage, const std::string& detail) {
  throw EstimationError(kind, stage, detail);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double grid_point(std::size_t i, std::size_t grid_size) {
  const double span = 1.0 - 2.0 * kRootSearchEps;
  return kRootSearchEps + span * static_cast<double>(i) / static_cast<double>(grid_size - 1);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double refine_root(const FVector& f, double lo, double hi, double g_lo, double g_hi) {
  auto g = [&f](double p) { return g_of_p(p, f); };
  auto tol = [](double a, double b) { return std::fabs(b - a) <= kBracketWidth; };
  std::uintmax_t iterations = kMaxRootIterations;
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, tol, iterations);
  return std::fabs(g(a)) <= std::fabs(g(b)) ? a : b;
}

}  // namespace

const char* to_string(EstimationErrorKind kind) {
  switch (kind) {
    case EstimationErrorKind::TooShort:
      return "TooShort";
    case EstimationErrorKind::NonPositiveVariance:
      return "NonPositiveVariance";
    case EstimationErrorKind::NonPositiveAutocov:
      return "NonPositiveAutocov";
    case EstimationErrorKind::NonPositiveTheta:
      return "NonPositiveTheta";
    case EstimationErrorKind::DiscriminantNonpositive:
      return "DiscriminantNonpositive";
    case EstimationErrorKind::NoRoot:
      return "NoRoot";
    case EstimationErrorKind::MultipleRoots:
      return "MultipleRoots";
    case EstimationErrorKind::NonPositiveRate:
      return "NonPositiveRate";
    case EstimationErrorKind::DomainError:
      return "DomainError";
  }
  return "Unknown";
}

EstimationError::EstimationError(EstimationErrorKind kind, std::string stage, const std::string& detail,
                                 std::vector<double> roots)
    : std::runtime_error(std::string(to_string(kind)) + " [" + stage + "]: " + detail),
      kind_(kind),
      stage_(std::move(stage)),
      roots_(std::move(roots)) {}

EmpiricalMoments empirical_moments(const SamplePath& path) {
  if (path.values.size() < 2) {
    fail(EstimationErrorKind::TooShort, "moments", "need at least 2 observations");
  }
  const auto sums = kernels::moment_sums(path.values);
  const double m = static_cast<double>(sums.count);
  EmpiricalMoments out;
  out.mu1 = sums.s1 / m;
  out.mu2 = sums.s2 / m;
  out.mu3 = sums.s3 / m;
  out.mu4 = sums.s4 / m;
  out.n_used = sums.count;
  out.h = path.h;
  return out;
}

std::complex<double> empirical_char_fn(const SamplePath& path, double u) {
  if (path.values.empty()) {
    fail(EstimationErrorKind::TooShort, "char_fn", "empty path");
  }
  double re = 0.0;
  double im = 0.0;
  for (double x : path.values) {
    re += std::cos(u * x);
    im += std::sin(u * x);
  }
  const double n = static_cast<double>(path.values.size());
  return {re / n, im / n};
}

std::complex<double> empirical_joint_char_fn(const SamplePath& path, double u, double v) {
  if (path.values.size() < 2) {
    fail(EstimationErrorKind::TooShort, "char_fn", "need at least 2 observations");
  }
  double re = 0.0;
  double im = 0.0;
  const std::size_t m = path.values.size() - 1;
  for (std::size_t j = 0; j < m; ++j) {
    const double arg = u * path.values[j] + v * path.values[j + 1];
    re += std::cos(arg);
    im += std::sin(arg);
  }
  return {re / static_cast<double>(m), im / static_cast<double>(m)};
}

double estimate_theta(const EmpiricalMoments& mom) {
  if (!(mom.h > 0.0)) fail(EstimationErrorKind::DomainError, "theta", "observation spacing h must be > 0");
  const double var = mom.mu2 - mom.mu1 * mom.mu1;
  const double autocov = mom.mu4 - mom.mu1 * mom.mu1;
  if (!(var > 0.0)) {
    fail(EstimationErrorKind::NonPositiveVariance, "theta", "mu2 - mu1^2 = " + num(var) + " <= 0");
  }
  if (!(autocov > 0.0)) {
    fail(EstimationErrorKind::NonPositiveAutocov, "theta", "mu4 - mu1^2 = " + num(autocov) + " <= 0");
  }
  const double ratio = var / autocov;
  if (!(ratio > 1.0)) {
    fail(EstimationErrorKind::NonPositiveTheta, "theta",
         "(mu2 - mu1^2) / (mu4 - mu1^2) = " + num(ratio) + " <= 1");
  }
  return std::log(ratio) / mom.h;
}

FVector compute_f(const EmpiricalMoments& mom, double theta_hat) {
  if (!(theta_hat > 0.0)) fail(EstimationErrorKind::DomainError, "f", "theta_hat must be > 0");
  const double var = mom.mu2 - mom.mu1 * mom.mu1;
  FVector f;
  f.theta_hat = theta_hat;
  f.f1 = theta_hat * mom.mu1;
  f.f2 = theta_hat * var;
  f.f3 = 0.5 * theta_hat * (mom.mu3 - mom.mu2 * mom.mu1 - 2.0 * mom.mu1 * var);
  if (!f.valid()) {
    fail(EstimationErrorKind::DiscriminantNonpositive, "f", "f2 - f1^2 = " + num(f.discriminant()) + " <= 0");
  }
  return f;
}

double g_of_p(double p, const FVector& f) {
  if (!(p > 0.0 && p < 1.0)) fail(EstimationErrorKind::DomainError, "g", "p = " + num(p) + " outside (0, 1)");
  const double disc = f.discriminant();
  if (disc < 0.0) fail(EstimationErrorKind::DiscriminantNonpositive, "g", "f2 - f1^2 < 0");
  const double q = 1.0 - p;
  const double s = std::sqrt(p * q * disc);
  const double up = f.f1 * p + s;
  const double down = f.f1 * q - s;
  return q * q * up * up * up + p * p * down * down * down - f.f3 * p * p * q * q;
}

std::vector<std::pair<std::size_t, std::size_t>> sign_change_brackets(const std::vector<double>& values) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t last = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int s = sign_of(values[i]);
    if (s == 0) continue;
    if (last != values.size() && s != sign_of(values[last])) out.emplace_back(last, i);
    last = i;
  }
  return out;
}

std::vector<GCurvePoint> g_curve(const FVector& f, std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("g_curve: grid_size must be >= 2");
  std::vector<GCurvePoint> out;
  out.reserve(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double p = grid_point(i, grid_size);
    const double dg = (g_of_p(p + kDerivativeStep, f) - g_of_p(p - kDerivativeStep, f)) / (2.0 * kDerivativeStep);
    out.push_back({p, g_of_p(p, f), dg});
  }
  return out;
}

PSolution solve_p(const FVector& f, std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("solve_p: grid_size must be >= 2");
  if (!f.valid()) {
    fail(EstimationErrorKind::DiscriminantNonpositive, "p", "f2 - f1^2 = " + num(f.discriminant()) + " <= 0");
  }
  const auto curve = g_curve(f, grid_size);
  std::vector<double> g(grid_size), dg(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    g[i] = curve[i].g;
    dg[i] = curve[i].dg;
  }

  const auto brackets = sign_change_brackets(g);
  PSolution sol;
  sol.sign_change_count = static_cast<int>(brackets.size());
  sol.derivative_sign_changes = static_cast<int>(sign_change_brackets(dg).size());

  if (brackets.empty()) {
    fail(EstimationErrorKind::NoRoot, "p", "g(p) has no sign change on [1e-6, 1 - 1e-6]");
  }
  std::vector<double> roots;
  roots.reserve(brackets.size());
  for (const auto& [lo, hi] : brackets) {
    roots.push_back(refine_root(f, curve[lo].p, curve[hi].p, g[lo], g[hi]));
  }
  if (roots.size() > 1) {
    throw EstimationError(EstimationErrorKind::MultipleRoots, "p",
                          std::to_string(roots.size()) + " sign changes of g(p)", roots);
  }
  sol.p_hat = roots.front();
  sol.bracket_lo = curve[brackets.front().first].p;
  sol.bracket_hi = curve[brackets.front().second].p;
  return sol;
}

RhoXi recover_rho_xi(double p_hat, const FVector& f) {
  if (!(p_hat > 0.0 && p_hat < 1.0)) {
    fail(EstimationErrorKind::DomainError, "rho_xi", "p_hat = " + num(p_hat) + " outside (0, 1)");
  }
  if (!f.valid()) {
    fail(EstimationErrorKind::DiscriminantNonpositive, "rho_xi", "f2 - f1^2 <= 0");
  }
  const double q = 1.0 - p_hat;
  // Positive branch of the quadratic in rho.
  const double rho = (f.f1 * p_hat + std::sqrt(p_hat * q * f.discriminant())) / p_hat;
  const double xi = (p_hat * rho - f.f1) / q;
  if (!(rho > 0.0) || !(xi > 0.0)) {
    fail(EstimationErrorKind::NonPositiveRate, "rho_xi", "rho = " + num(rho) + ", xi = " + num(xi));
  }
  return {rho, xi};
}

EstimationResult estimate_from_moments(const EmpiricalMoments& moments, const EstimationOptions& options) {
  EstimationResult r;
  r.moments = moments;
  r.theta_hat = estimate_theta(moments);
  r.f = compute_f(moments, r.theta_hat);
  const auto sol = solve_p(r.f, options.grid_size);
  r.p_hat = sol.p_hat;
  r.bracket_lo = sol.bracket_lo;
  r.bracket_hi = sol.bracket_hi;
  r.sign_change_count = sol.sign_change_count;
  r.derivative_sign_changes = sol.derivative_sign_changes;
  const auto rx = recover_rho_xi(r.p_hat, r.f);
  r.rho_hat = rx.rho;
  r.xi_hat = rx.xi;
  r.eta_hat = 1.0 / rx.rho;
  r.phi_hat = 1.0 / rx.xi;
  if (options.keep_g_curve) r.g_curve = g_curve(r.f, options.grid_size);
  return r;
}

EstimationResult estimate_all(const SamplePath& path, const EstimationOptions& options) {
  return estimate_from_moments(empirical_moments(path), options);
}

}  // namespace deou
