#include "deou/kernels.hpp"

#include <immintrin.h>

#include <array>

namespace deou::kernels::avx2 {
namespace {

// Two 4-wide registers hold lanes 0..3 and 4..7.
struct Acc {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
};

std::array<double, kLanes> spill(const Acc& acc) {
  std::array<double, kLanes> out;
  _mm256_storeu_pd(out.data(), acc.lo);
  _mm256_storeu_pd(out.data() + 4, acc.hi);
  return out;
}

double reduce(const std::array<double, kLanes>& acc) {
  const double t0 = acc[0] + acc[4];
  const double t1 = acc[1] + acc[5];
  const double t2 = acc[2] + acc[6];
  const double t3 = acc[3] + acc[7];
  return (t0 + t1) + (t2 + t3);
}

}  // namespace

double sum(const double* x, std::size_t n) {
  Acc acc;
  const std::size_t blocks = n / kLanes;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* p = x + b * kLanes;
    acc.lo = _mm256_add_pd(acc.lo, _mm256_loadu_pd(p));
    acc.hi = _mm256_add_pd(acc.hi, _mm256_loadu_pd(p + 4));
  }
  auto lanes = spill(acc);
  for (std::size_t j = blocks * kLanes; j < n; ++j) lanes[j % kLanes] += x[j];
  return reduce(lanes);
}

double dot(const double* a, const double* b, std::size_t n) {
  Acc acc;
  const std::size_t blocks = n / kLanes;
  for (std::size_t k = 0; k < blocks; ++k) {
    const std::size_t o = k * kLanes;
    acc.lo = _mm256_add_pd(acc.lo, _mm256_mul_pd(_mm256_loadu_pd(a + o), _mm256_loadu_pd(b + o)));
    acc.hi = _mm256_add_pd(acc.hi, _mm256_mul_pd(_mm256_loadu_pd(a + o + 4), _mm256_loadu_pd(b + o + 4)));
  }
  auto lanes = spill(acc);
  for (std::size_t j = blocks * kLanes; j < n; ++j) lanes[j % kLanes] += a[j] * b[j];
  return reduce(lanes);
}

MomentSums moment_sums(const double* x, std::size_t n) {
  MomentSums out;
  if (n < 2) return out;
  const std::size_t m = n - 1;
  Acc a1, a2, a3, a4;
  const std::size_t blocks = m / kLanes;
  for (std::size_t k = 0; k < blocks; ++k) {
    const std::size_t o = k * kLanes;
    const __m256d vlo = _mm256_loadu_pd(x + o);
    const __m256d vhi = _mm256_loadu_pd(x + o + 4);
    const __m256d nlo = _mm256_loadu_pd(x + o + 1);
    const __m256d nhi = _mm256_loadu_pd(x + o + 5);
    const __m256d sqlo = _mm256_mul_pd(vlo, vlo);
    const __m256d sqhi = _mm256_mul_pd(vhi, vhi);
    a1.lo = _mm256_add_pd(a1.lo, vlo);
    a1.hi = _mm256_add_pd(a1.hi, vhi);
    a2.lo = _mm256_add_pd(a2.lo, sqlo);
    a2.hi = _mm256_add_pd(a2.hi, sqhi);
    a3.lo = _mm256_add_pd(a3.lo, _mm256_mul_pd(sqlo, vlo));
    a3.hi = _mm256_add_pd(a3.hi, _mm256_mul_pd(sqhi, vhi));
    a4.lo = _mm256_add_pd(a4.lo, _mm256_mul_pd(vlo, nlo));
    a4.hi = _mm256_add_pd(a4.hi, _mm256_mul_pd(vhi, nhi));
  }
  auto l1 = spill(a1), l2 = spill(a2), l3 = spill(a3), l4 = spill(a4);
  for (std::size_t j = blocks * kLanes; j < m; ++j) {
    const std::size_t l = j % kLanes;
    const double v = x[j];
    const double sq = v * v;
    l1[l] += v;
    l2[l] += sq;
    l3[l] += sq * v;
    l4[l] += v * x[j + 1];
  }
  out.s1 = reduce(l1);
  out.s2 = reduce(l2);
  out.s3 = reduce(l3);
  out.s4 = reduce(l4);
  out.count = m;
  return out;
}

}  // namespace deou::kernels::avx2
