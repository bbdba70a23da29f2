#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ancer/simd.hpp"

namespace ancer::simd {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(ANCER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(ANCER_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa select_isa() {
  if (const char* forced = std::getenv("ANCER_ISA")) {
    const std::string name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == isa_name(isa) && cpu_has(isa)) return isa;
    }
  }
  if (cpu_has(Isa::avx2)) return Isa::avx2;
  if (cpu_has(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return cpu_has(isa); }

const KernelTable& kernels(Isa isa) {
  if (!cpu_has(isa))
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  switch (isa) {
#if defined(ANCER_HAVE_AVX2)
    case Isa::avx2:
      return detail::avx2_table();
#endif
#if defined(ANCER_HAVE_NEON)
    case Isa::neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const KernelTable& kernels() {
  static const KernelTable& table = kernels(active_isa());
  return table;
}

}  // namespace ancer::simd
