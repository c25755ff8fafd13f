#pragma once

// Asymptotic covariance of the moment estimator.
//
// The moment vector mu_n is the time average of g(X_j, X_{j+1}) with
// g = (x, x^2, x^3, x y). Its long-run covariance A (sqrt(n)(mu_n - mu) ->
// N(0, A)) is estimated by Bartlett-weighted sums of sample auto- and
// cross-covariances. The parameter covariance follows by the delta method
// through theta = h^{-1}(tilde_h(mu)).

#include "deou/estimate.hpp"
#include "deou/model.hpp"
#include "deou/simulate.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace deou {

class AsymptoticsError : public std::runtime_error {
 public:
  enum class Kind { TooShort, SingularJacobian };

  AsymptoticsError(Kind kind, const std::string& what, double condition_number = 0.0)
      : std::runtime_error(what), kind_(kind), condition_number_(condition_number) {}

  Kind kind() const { return kind_; }
  const char* name() const { return kind_ == Kind::TooShort ? "TooShort" : "SingularJacobian"; }
  double condition_number() const { return condition_number_; }

 private:
  Kind kind_;
  double condition_number_;
};

// The four aligned series g_k(X_j, X_{j+1}), j = 0..n-2.
struct ObservableSeries {
  std::array<std::vector<double>, 4> g;

  std::size_t size() const { return g[0].size(); }
};

ObservableSeries observable_series(const SamplePath& path);

inline constexpr std::size_t kMinLongRunLength = 30;

struct LongRunOptions {
  // Bartlett truncation lag; empty selects ceil(m^{1/3}).
  std::optional<std::size_t> bandwidth;
  // Fit a VAR(1) to the centered series, apply the Bartlett sums to its
  // residuals and recolor with (I - Phi)^{-1}. Without this the truncated
  // sums badly underestimate A when the sampling interval is small relative
  // to the mean-reversion time.
  bool prewhiten = true;
};

std::size_t cube_root_bandwidth(std::size_t m);

// Sample cross-covariance (1/m) sum_j (a_j - abar)(b_{j+lag} - bbar).
double sample_cross_cov(const std::vector<double>& a, const std::vector<double>& b, std::size_t lag);

struct LongRunCovariance {
  Matrix4 A = Matrix4::Zero();
  Matrix4 var_coefficients = Matrix4::Zero();  // Phi; zero unless prewhitened
  std::size_t bandwidth = 0;
  std::size_t m = 0;
  bool prewhitened = false;
};

// Bartlett-weighted sums, w_k = 1 - k / (L + 1):
//   diagonal      C_ii(0) + 2 sum_k w_k C_ii(k)
//   off-diagonal  C_ij(0) + sum_k w_k (C_ij(k) + C_ji(k))
LongRunCovariance long_run_cov(const ObservableSeries& series, const LongRunOptions& options = {});

inline constexpr double kMaxJacobianCondition = 1e12;

// B = (d h / d theta)^{-1} (d tilde_h / d mu), the Jacobian of the estimator
// with respect to the moment vector. Rows follow (p, rho, xi, theta).
Matrix4 estimator_jacobian(const EstimationTarget& target, double h, const StationaryMoments& moments);

// Sigma = B A B^T.
Matrix4 sigma_matrix(const Matrix4& A, const EstimationTarget& target, double h,
                     const StationaryMoments& moments);

struct CovarianceEstimate {
  Matrix4 A = Matrix4::Zero();
  Matrix4 Sigma = Matrix4::Zero();  // order (p, rho, xi, theta)
  std::size_t bandwidth = 0;
  std::size_t n = 0;                // number of terms in each moment average
  bool prewhitened = false;
  double min_eigen_A = 0.0;
  double min_eigen_Sigma = 0.0;
  bool psd_A = true;
  bool psd_Sigma = true;
};

bool is_psd_up_to_noise(const Matrix4& m, double* min_eigenvalue = nullptr);

CovarianceEstimate estimate_covariance(const SamplePath& path, const EstimationResult& result,
                                       const LongRunOptions& options = {});

struct Interval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double std_error = 0.0;
  bool valid = true;  // false when the variance estimate is negative
};

struct ParameterIntervals {
  double level = 0.95;
  Interval p, rho, xi, theta, eta, phi;
  bool psd_violation = false;
};

ParameterIntervals confidence_intervals(const EstimationResult& result, const CovarianceEstimate& cov,
                                        double level);

}  // namespace deou
