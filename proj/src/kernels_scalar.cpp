#include "deou/kernels.hpp"

#include <array>

namespace deou::kernels::scalar {
namespace {

using Lanes = std::array<double, kLanes>;

double reduce(const Lanes& acc) {
  const double t0 = acc[0] + acc[4];
  const double t1 = acc[1] + acc[5];
  const double t2 = acc[2] + acc[6];
  const double t3 = acc[3] + acc[7];
  return (t0 + t1) + (t2 + t3);
}

}  // namespace

double sum(const double* x, std::size_t n) {
  Lanes acc{};
  for (std::size_t j = 0; j < n; ++j) acc[j % kLanes] += x[j];
  return reduce(acc);
}

double dot(const double* a, const double* b, std::size_t n) {
  Lanes acc{};
  for (std::size_t j = 0; j < n; ++j) acc[j % kLanes] += a[j] * b[j];
  return reduce(acc);
}

MomentSums moment_sums(const double* x, std::size_t n) {
  MomentSums out;
  if (n < 2) return out;
  const std::size_t m = n - 1;
  Lanes a1{}, a2{}, a3{}, a4{};
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t l = j % kLanes;
    const double v = x[j];
    const double sq = v * v;
    a1[l] += v;
    a2[l] += sq;
    a3[l] += sq * v;
    a4[l] += v * x[j + 1];
  }
  out.s1 = reduce(a1);
  out.s2 = reduce(a2);
  out.s3 = reduce(a3);
  out.s4 = reduce(a4);
  out.count = m;
  return out;
}

}  // namespace deou::kernels::scalar
