#pragma once

// Ergodic moment estimator for (theta, p, eta, phi) with lambda = sigma = 1.
//
// Pipeline: sample moments -> theta_hat from the lag-h autocovariance ratio
// -> reduced statistics f1, f2, f3 -> scalar root g(p) = 0 on (0, 1)
// -> rho, xi by back-substitution -> eta = 1/rho, phi = 1/xi.

#include "deou/model.hpp"
#include "deou/simulate.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace deou {

enum class EstimationErrorKind {
  TooShort,
  NonPositiveVariance,
  NonPositiveAutocov,
  NonPositiveTheta,
  DiscriminantNonpositive,
  NoRoot,
  MultipleRoots,
  NonPositiveRate,
  DomainError,
};

const char* to_string(EstimationErrorKind kind);

class EstimationError : public std::runtime_error {
 public:
  EstimationError(EstimationErrorKind kind, std::string stage, const std::string& detail,
                  std::vector<double> roots = {});

  EstimationErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }
  // Populated for MultipleRoots.
  const std::vector<double>& roots() const { return roots_; }

 private:
  EstimationErrorKind kind_;
  std::string stage_;
  std::vector<double> roots_;
};

struct EmpiricalMoments {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double mu4 = 0.0;
  std::size_t n_used = 0;
  double h = 0.0;

  StationaryMoments as_stationary() const { return {mu1, mu2, mu3, mu4, h}; }
};

struct FVector {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double theta_hat = 0.0;

  double discriminant() const { return f2 - f1 * f1; }
  bool valid() const { return discriminant() > 0.0; }
};

struct GCurvePoint {
  double p;
  double g;
  double dg;  // central-difference derivative
};

struct PSolution {
  double p_hat = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int sign_change_count = 0;
  // Sign changes of the numerical g' over the grid; 0 means g is monotone
  // on the scanned range and the root is unique.
  int derivative_sign_changes = 0;
};

struct EstimationOptions {
  std::size_t grid_size = 2001;
  bool keep_g_curve = false;
};

struct EstimationResult {
  double theta_hat = 0.0;
  double p_hat = 0.0;
  double rho_hat = 0.0;
  double xi_hat = 0.0;
  double eta_hat = 0.0;
  double phi_hat = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int sign_change_count = 0;
  int derivative_sign_changes = 0;
  EmpiricalMoments moments;
  FVector f;
  std::vector<GCurvePoint> g_curve;

  EstimationTarget target() const { return {p_hat, rho_hat, xi_hat, theta_hat}; }
};

inline constexpr double kRootSearchEps = 1e-6;

// mu1..mu3 over X_1..X_{n-1}, mu4 over the pairs (X_j, X_{j+1}); all four use
// the same n-1 indices.
EmpiricalMoments empirical_moments(const SamplePath& path);

std::complex<double> empirical_char_fn(const SamplePath& path, double u);
std::complex<double> empirical_joint_char_fn(const SamplePath& path, double u, double v);

double estimate_theta(const EmpiricalMoments& moments);

FVector compute_f(const EmpiricalMoments& moments, double theta_hat);

double g_of_p(double p, const FVector& f);

// Index pairs (lo, hi) bracketing each strict sign change of `values`.
// Exact zeros are skipped, so a zero on a grid point counts once when the
// sign flips across it and not at all when it only touches.
std::vector<std::pair<std::size_t, std::size_t>> sign_change_brackets(const std::vector<double>& values);

// Samples (p, g, g') on a uniform grid over [eps, 1 - eps].
std::vector<GCurvePoint> g_curve(const FVector& f, std::size_t grid_size);

PSolution solve_p(const FVector& f, std::size_t grid_size = 2001);

struct RhoXi {
  double rho;
  double xi;
};

RhoXi recover_rho_xi(double p_hat, const FVector& f);

EstimationResult estimate_from_moments(const EmpiricalMoments& moments,
                                       const EstimationOptions& options = {});

EstimationResult estimate_all(const SamplePath& path, const EstimationOptions& options = {});

}  // namespace deou
