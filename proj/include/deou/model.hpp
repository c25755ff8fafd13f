#pragma once

// Double-exponential Ornstein-Uhlenbeck model: dX = -theta X dt + sigma dZ,
// where Z is compound Poisson with rate lambda and jump density
//   p eta e^{-eta x} 1{x >= 0} + (1-p) phi e^{phi x} 1{x < 0}.
//
// Everything here is a pure function of its arguments and serves as the
// analytic ground truth for the simulator and the estimators.

#include <Eigen/Core>

#include <complex>

namespace deou {

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

struct ModelParams {
  double theta = 1.0;   // mean-reversion rate
  double sigma = 1.0;   // jump scale
  double lambda = 1.0;  // Poisson intensity
  double p = 0.5;       // up-jump probability
  double eta = 1.0;     // up-jump rate
  double phi = 1.0;     // down-jump rate

  double q() const { return 1.0 - p; }

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

// rho = sigma / eta, xi = sigma / phi.
struct DerivedParams {
  double rho;
  double xi;
};

DerivedParams derive(const ModelParams& params);

// The four unknowns of the moment system, in Jacobian column order
// (p, rho, xi, theta). Only meaningful with lambda = sigma = 1.
struct EstimationTarget {
  double p;
  double rho;
  double xi;
  double theta;
};

// Rejects parameter sets with lambda != 1 or sigma != 1.
EstimationTarget estimation_target(const ModelParams& params);

// E[X0], E[X0^2], E[X0^3], E[X0 X_h] under the stationary law.
struct StationaryMoments {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  double h = 0.0;
};

// E[exp(iuX)] for X stationary:
//   (1 - iu sigma/eta)^{-p lambda/theta} (1 + iu sigma/phi)^{-q lambda/theta}.
// Powers use the principal logarithm. Both bases have real part 1 for real
// u, so the branch cut on the negative real axis is never reached.
std::complex<double> stationary_char_fn(const ModelParams& params, double u);

// E[exp(iu X0 + iv Xh)] for the stationary process observed at lag h.
std::complex<double> joint_char_fn(const ModelParams& params, double u, double v, double h);

StationaryMoments analytic_moments(const ModelParams& params, double h);

// Parameter side of the moment system:
//   h1 = (p rho - q xi) / theta
//   h2 = (p rho^2 + q xi^2) / theta
//   h3 = 2 (p rho^3 - q xi^3) / theta
//   h4 = e^{-theta h} (p rho^2 + q xi^2) / theta
// The factor 2 in h3 makes h(target) == tilde_h(analytic moments) exact.
Vector4 h_map(const EstimationTarget& target, double h);

// Moment side: (mu1, mu2 - mu1^2, mu3 - mu2 mu1 - 2 mu1 (mu2 - mu1^2), mu4 - mu1^2).
Vector4 tilde_h_map(const StationaryMoments& moments);

// d h_i / d (p, rho, xi, theta)_j
Matrix4 jacobian_h(const EstimationTarget& target, double h);

// d tilde_h_i / d mu_j
Matrix4 jacobian_tilde_h(const StationaryMoments& moments);

}  // namespace deou
