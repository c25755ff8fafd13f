#include "deou/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace deou {
namespace {

using cplx = std::complex<double>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid model parameters: ") + what);
}

// log of the stationary characteristic function at argument w.
cplx log_stationary_cf(const ModelParams& m, double w) {
  const double a_up = m.p * m.lambda / m.theta;
  const double a_dn = m.q() * m.lambda / m.theta;
  const cplx up = std::log(cplx(1.0, -w * m.sigma / m.eta));
  const cplx dn = std::log(cplx(1.0, w * m.sigma / m.phi));
  return -a_up * up - a_dn * dn;
}

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(theta) && theta > 0.0, "theta must be > 0");
  require(std::isfinite(sigma) && sigma > 0.0, "sigma must be > 0");
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be > 0");
  require(std::isfinite(p) && p > 0.0 && p < 1.0, "p must lie in (0, 1)");
  require(std::isfinite(eta) && eta > 0.0, "eta must be > 0");
  require(std::isfinite(phi) && phi > 0.0, "phi must be > 0");
}

DerivedParams derive(const ModelParams& params) {
  return {params.sigma / params.eta, params.sigma / params.phi};
}

EstimationTarget estimation_target(const ModelParams& params) {
  params.validate();
  if (params.lambda != 1.0 || params.sigma != 1.0) {
    throw std::invalid_argument("estimation requires lambda = sigma = 1");
  }
  const auto d = derive(params);
  return {params.p, d.rho, d.xi, params.theta};
}

std::complex<double> stationary_char_fn(const ModelParams& params, double u) {
  if (u == 0.0) return {1.0, 0.0};
  return std::exp(log_stationary_cf(params, u));
}

std::complex<double> joint_char_fn(const ModelParams& params, double u, double v, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("joint_char_fn: h must be > 0");
  const double decay = std::exp(-params.theta * h);
  const double a_up = params.p * params.lambda / params.theta;
  const double a_dn = params.q() * params.lambda / params.theta;
  const double r = params.sigma / params.eta;
  const double x = params.sigma / params.phi;

  cplx log_cf = log_stationary_cf(params, u + v * decay);
  // Contribution of jumps arriving in (0, h].
  log_cf += a_up * (std::log(cplx(1.0, -r * decay * v)) - std::log(cplx(1.0, -r * v)));
  log_cf += a_dn * (std::log(cplx(1.0, x * decay * v)) - std::log(cplx(1.0, x * v)));
  return std::exp(log_cf);
}

StationaryMoments analytic_moments(const ModelParams& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("analytic_moments: h must be > 0");
  const auto d = derive(params);
  const double p = params.p;
  const double q = params.q();
  const double scale = params.lambda / params.theta;

  const double c1 = scale * (p * d.rho - q * d.xi);
  const double c2 = scale * (p * d.rho * d.rho + q * d.xi * d.xi);
  const double c3 = 2.0 * scale * (p * d.rho * d.rho * d.rho - q * d.xi * d.xi * d.xi);

  StationaryMoments m;
  m.h = h;
  m.m1 = c1;
  m.m2 = c2 + c1 * c1;
  m.m3 = c3 + m.m2 * m.m1 + 2.0 * m.m1 * (m.m2 - m.m1 * m.m1);
  m.m4 = std::exp(-params.theta * h) * c2 + c1 * c1;
  return m;
}

Vector4 h_map(const EstimationTarget& t, double h) {
  const double q = 1.0 - t.p;
  const double second = t.p * t.rho * t.rho + q * t.xi * t.xi;
  Vector4 out;
  out << (t.p * t.rho - q * t.xi) / t.theta,
      second / t.theta,
      2.0 * (t.p * t.rho * t.rho * t.rho - q * t.xi * t.xi * t.xi) / t.theta,
      std::exp(-t.theta * h) * second / t.theta;
  return out;
}

Vector4 tilde_h_map(const StationaryMoments& m) {
  const double var = m.m2 - m.m1 * m.m1;
  Vector4 out;
  out << m.m1, var, m.m3 - m.m2 * m.m1 - 2.0 * m.m1 * var, m.m4 - m.m1 * m.m1;
  return out;
}

Matrix4 jacobian_h(const EstimationTarget& t, double h) {
  const double p = t.p;
  const double q = 1.0 - p;
  const double r = t.rho;
  const double x = t.xi;
  const double inv = 1.0 / t.theta;
  const double decay = std::exp(-t.theta * h);
  const Vector4 hv = h_map(t, h);

  Matrix4 j;
  // columns: p, rho, xi, theta
  j.row(0) << inv * (r + x), inv * p, -inv * q, -hv(0) * inv;
  j.row(1) << inv * (r * r - x * x), 2.0 * inv * p * r, 2.0 * inv * q * x, -hv(1) * inv;
  j.row(2) << 2.0 * inv * (r * r * r + x * x * x), 6.0 * inv * p * r * r, -6.0 * inv * q * x * x,
      -hv(2) * inv;
  j.row(3) << decay * inv * (r * r - x * x), 2.0 * decay * inv * p * r, 2.0 * decay * inv * q * x,
      -hv(3) * (inv + h);
  return j;
}

Matrix4 jacobian_tilde_h(const StationaryMoments& m) {
  Matrix4 j = Matrix4::Zero();
  j(0, 0) = 1.0;
  j(1, 0) = -2.0 * m.m1;
  j(1, 1) = 1.0;
  // tilde_h3 = mu3 - 3 mu1 mu2 + 2 mu1^3
  j(2, 0) = -3.0 * m.m2 + 6.0 * m.m1 * m.m1;
  j(2, 1) = -3.0 * m.m1;
  j(2, 2) = 1.0;
  j(3, 0) = -2.0 * m.m1;
  j(3, 3) = 1.0;
  return j;
}

}  // namespace deou
