#include "deou/asymptotics.hpp"

#include "deou/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace deou {
namespace {

constexpr double kMaxVarSingularValue = 0.999;

std::vector<double> centered(const std::vector<double>& x) {
  const double mean = kernels::sum(x) / static_cast<double>(x.size());
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [mean](double v) { return v - mean; });
  return out;
}

double lagged_dot(const std::vector<double>& a, const std::vector<double>& b, std::size_t lag) {
  const std::size_t len = a.size() - lag;
  return kernels::best().dot(a.data(), b.data() + lag, len);
}

using Centered = std::array<std::vector<double>, 4>;

Centered center_all(const std::array<std::vector<double>, 4>& g) {
  Centered c;
  for (std::size_t k = 0; k < 4; ++k) c[k] = centered(g[k]);
  return c;
}

Matrix4 bartlett_sums(const Centered& c, std::size_t lags) {
  const std::size_t m = c[0].size();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double inv_l1 = 1.0 / static_cast<double>(lags + 1);
  Matrix4 a;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      double acc = lagged_dot(c[i], c[j], 0) * inv_m;
      for (std::size_t k = 1; k <= lags; ++k) {
        const double w = 1.0 - static_cast<double>(k) * inv_l1;
        const double fwd = lagged_dot(c[i], c[j], k) * inv_m;
        const double bwd = i == j ? fwd : lagged_dot(c[j], c[i], k) * inv_m;
        acc += w * (fwd + bwd);
      }
      a(i, j) = acc;
      a(j, i) = acc;
    }
  }
  return a;
}

// Least-squares VAR(1) coefficients of the centered series, with singular
// values capped below 1 so that I - Phi stays invertible.
Matrix4 fit_var1(const Centered& c) {
  const std::size_t m = c[0].size();
  Matrix4 sxx, syx;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      sxx(i, j) = kernels::best().dot(c[i].data(), c[j].data(), m - 1);
      syx(i, j) = kernels::best().dot(c[i].data() + 1, c[j].data(), m - 1);
    }
  }
  Matrix4 phi = syx * sxx.completeOrthogonalDecomposition().pseudoInverse();
  Eigen::JacobiSVD<Matrix4> svd(phi, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector4d sv = svd.singularValues();
  if (sv.maxCoeff() > kMaxVarSingularValue) {
    sv = sv.cwiseMin(kMaxVarSingularValue);
    phi = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
  }
  return phi;
}

}  // namespace

ObservableSeries observable_series(const SamplePath& path) {
  if (path.values.size() < 2) {
    throw AsymptoticsError(AsymptoticsError::Kind::TooShort, "observable_series: need at least 2 observations");
  }
  const std::size_t m = path.values.size() - 1;
  ObservableSeries out;
  for (auto& s : out.g) s.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = path.values[j];
    const double sq = x * x;
    out.g[0][j] = x;
    out.g[1][j] = sq;
    out.g[2][j] = sq * x;
    out.g[3][j] = x * path.values[j + 1];
  }
  return out;
}

std::size_t cube_root_bandwidth(std::size_t m) {
  if (m < 2) return 0;
  const auto lags = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(m))));
  return std::min(lags, m - 1);
}

double sample_cross_cov(const std::vector<double>& a, const std::vector<double>& b, std::size_t lag) {
  if (a.size() != b.size() || lag >= a.size()) throw std::invalid_argument("sample_cross_cov: bad arguments");
  const auto ca = centered(a);
  const auto cb = centered(b);
  return lagged_dot(ca, cb, lag) / static_cast<double>(a.size());
}

LongRunCovariance long_run_cov(const ObservableSeries& series, const LongRunOptions& options) {
  const std::size_t m = series.size();
  if (m < kMinLongRunLength) {
    throw AsymptoticsError(AsymptoticsError::Kind::TooShort,
                           "long_run_cov: need at least " + std::to_string(kMinLongRunLength) + " terms, got " +
                               std::to_string(m));
  }
  const Centered c = center_all(series.g);

  LongRunCovariance out;
  out.m = m;
  out.prewhitened = options.prewhiten;
  if (!options.prewhiten) {
    out.bandwidth = options.bandwidth ? std::min(*options.bandwidth, m - 1) : cube_root_bandwidth(m);
    out.A = bartlett_sums(c, out.bandwidth);
    return out;
  }

  const Matrix4 phi = fit_var1(c);
  Centered resid;
  for (auto& r : resid) r.resize(m - 1);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    for (std::size_t i = 0; i < 4; ++i) {
      double e = c[i][j + 1];
      for (std::size_t k = 0; k < 4; ++k) e -= phi(i, k) * c[k][j];
      resid[i][j] = e;
    }
  }
  out.var_coefficients = phi;
  out.bandwidth = options.bandwidth ? std::min(*options.bandwidth, m - 2) : cube_root_bandwidth(m - 1);
  const Matrix4 recolor = (Matrix4::Identity() - phi).inverse();
  const Matrix4 a = recolor * bartlett_sums(resid, out.bandwidth) * recolor.transpose();
  out.A = 0.5 * (a + a.transpose());
  return out;
}

Matrix4 estimator_jacobian(const EstimationTarget& target, double h, const StationaryMoments& moments) {
  const Matrix4 dh = jacobian_h(target, h);
  const Eigen::JacobiSVD<Matrix4> svd(dh);
  const auto& sv = svd.singularValues();
  const double cond = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxJacobianCondition)) {
    throw AsymptoticsError(AsymptoticsError::Kind::SingularJacobian,
                           "parameter Jacobian is singular (condition number " + std::to_string(cond) + ")", cond);
  }
  return dh.partialPivLu().solve(jacobian_tilde_h(moments));
}

Matrix4 sigma_matrix(const Matrix4& A, const EstimationTarget& target, double h,
                     const StationaryMoments& moments) {
  const Matrix4 b = estimator_jacobian(target, h, moments);
  Matrix4 sigma = b * A * b.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

bool is_psd_up_to_noise(const Matrix4& m, double* min_eigenvalue) {
  const Eigen::SelfAdjointEigenSolver<Matrix4> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (min_eigenvalue) *min_eigenvalue = lo;
  return lo >= -1e-8 * std::fabs(m.trace());
}

CovarianceEstimate estimate_covariance(const SamplePath& path, const EstimationResult& result,
                                       const LongRunOptions& options) {
  const auto series = observable_series(path);
  const auto lrc = long_run_cov(series, options);
  CovarianceEstimate cov;
  cov.A = lrc.A;
  cov.bandwidth = lrc.bandwidth;
  cov.n = lrc.m;
  cov.prewhitened = lrc.prewhitened;
  cov.Sigma = sigma_matrix(cov.A, result.target(), result.moments.h, result.moments.as_stationary());
  cov.psd_A = is_psd_up_to_noise(cov.A, &cov.min_eigen_A);
  cov.psd_Sigma = is_psd_up_to_noise(cov.Sigma, &cov.min_eigen_Sigma);
  return cov;
}

ParameterIntervals confidence_intervals(const EstimationResult& result, const CovarianceEstimate& cov,
                                        double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  if (cov.n == 0) throw std::invalid_argument("covariance estimate has n = 0");
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + level));
  const double nan = std::numeric_limits<double>::quiet_NaN();

  ParameterIntervals out;
  out.level = level;
  auto make = [&](double estimate, int k) {
    Interval iv;
    iv.estimate = estimate;
    const double var = cov.Sigma(k, k) / static_cast<double>(cov.n);
    if (!(var >= 0.0)) {
      iv.valid = false;
      iv.lower = iv.upper = iv.std_error = nan;
      out.psd_violation = true;
      return iv;
    }
    iv.std_error = std::sqrt(var);
    iv.lower = estimate - z * iv.std_error;
    iv.upper = estimate + z * iv.std_error;
    return iv;
  };
  out.p = make(result.p_hat, 0);
  out.rho = make(result.rho_hat, 1);
  out.xi = make(result.xi_hat, 2);
  out.theta = make(result.theta_hat, 3);

  // x -> 1/x is decreasing on (0, inf); a non-positive lower end leaves the
  // reciprocal interval unbounded above.
  auto reciprocal = [&](const Interval& src, double estimate) {
    Interval iv;
    iv.estimate = estimate;
    iv.std_error = nan;
    iv.valid = src.valid;
    if (!src.valid) {
      iv.lower = iv.upper = nan;
      return iv;
    }
    iv.lower = 1.0 / src.upper;
    iv.upper = src.lower > 0.0 ? 1.0 / src.lower : std::numeric_limits<double>::infinity();
    return iv;
  };
  out.eta = reciprocal(out.rho, result.eta_hat);
  out.phi = reciprocal(out.xi, result.xi_hat > 0.0 ? result.phi_hat : nan);
  if (!cov.psd_Sigma) out.psd_violation = true;
  return out;
}

}  // namespace deou
