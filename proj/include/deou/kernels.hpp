#pragma once

// Reduction kernels used by the moment and covariance estimators.
//
// Every kernel accumulates term j into lane (j % kLanes) and combines the
// lanes in a fixed tree, so the scalar reference and the AVX2 variant
// produce bit-identical results. Build with -ffp-contract=off.

#include <cstddef>
#include <span>
#include <string_view>

namespace deou::kernels {

inline constexpr std::size_t kLanes = 8;

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// Sums over the pairs (x[j], x[j+1]), j = 0..n-2.
struct MomentSums {
  double s1 = 0.0;   // sum x
  double s2 = 0.0;   // sum x^2
  double s3 = 0.0;   // sum x^3
  double s4 = 0.0;   // sum x[j] * x[j+1]
  std::size_t count = 0;
};

struct KernelTable {
  Isa isa;
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  MomentSums (*moment_sums)(const double* x, std::size_t n);
};

// True when the CPU and the build both support the given variant.
bool available(Isa isa);

// Kernel table for a specific variant; throws std::invalid_argument if the
// variant is unavailable.
const KernelTable& table(Isa isa);

// Best available variant, detected once per process.
const KernelTable& best();

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
MomentSums moment_sums(std::span<const double> x);

namespace scalar {
double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
MomentSums moment_sums(const double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
MomentSums moment_sums(const double* x, std::size_t n);
}  // namespace avx2

}  // namespace deou::kernels
