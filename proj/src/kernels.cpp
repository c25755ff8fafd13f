#include "deou/kernels.hpp"

#include <stdexcept>
#include <string>

namespace deou::kernels {
namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::sum, &scalar::dot, &scalar::moment_sums};

#if defined(DEOU_HAVE_AVX2_TU)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::sum, &avx2::dot, &avx2::moment_sums};
#endif

bool cpu_has_avx2() {
#if defined(DEOU_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool available(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool has_avx2 = cpu_has_avx2();
  return has_avx2;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) {
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  }
#if defined(DEOU_HAVE_AVX2_TU)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& best() {
  static const KernelTable& chosen = available(Isa::avx2) ? table(Isa::avx2) : table(Isa::scalar);
  return chosen;
}

double sum(std::span<const double> x) { return best().sum(x.data(), x.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return best().dot(a.data(), b.data(), a.size());
}

MomentSums moment_sums(std::span<const double> x) { return best().moment_sums(x.data(), x.size()); }

}  // namespace deou::kernels
