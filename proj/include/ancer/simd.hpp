#pragma once
// Data-parallel kernels used by the hot loops (dense layers, perturbation
// draws, weighted norms). Every kernel has a scalar reference version; vector
// variants are selected once at startup from the host CPU and can be pinned
// with ANCER_ISA=scalar|avx2|neon.

#include <cstddef>
#include <span>
#include <string_view>

namespace ancer::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = x[i] + theta[i] * eps[i]
  void (*scale_add)(const double* x, const double* theta, const double* eps,
                    double* out, std::size_t n);
  // sum_i (d[i] / theta[i])^2
  double (*weighted_sq_norm)(const double* d, const double* theta, std::size_t n);
  // sum_i |d[i]| / theta[i]
  double (*weighted_l1_norm)(const double* d, const double* theta, std::size_t n);
  // max_i |d[i]| * theta[i]
  double (*weighted_linf_norm)(const double* d, const double* theta, std::size_t n);
  // v[i] = max(v[i], 0)
  void (*relu)(double* v, std::size_t n);
};

bool isa_available(Isa isa);

// Table for a specific ISA; throws std::invalid_argument if it was not built
// or the CPU lacks it.
const KernelTable& kernels(Isa isa);

// Table selected for this process.
const KernelTable& kernels();
Isa active_isa();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}
inline void scale_add(std::span<const double> x, std::span<const double> theta,
                      std::span<const double> eps, std::span<double> out) {
  kernels().scale_add(x.data(), theta.data(), eps.data(), out.data(), x.size());
}
inline double weighted_sq_norm(std::span<const double> d, std::span<const double> theta) {
  return kernels().weighted_sq_norm(d.data(), theta.data(), d.size());
}
inline double weighted_l1_norm(std::span<const double> d, std::span<const double> theta) {
  return kernels().weighted_l1_norm(d.data(), theta.data(), d.size());
}
inline double weighted_linf_norm(std::span<const double> d, std::span<const double> theta) {
  return kernels().weighted_linf_norm(d.data(), theta.data(), d.size());
}
inline void relu(std::span<double> v) { kernels().relu(v.data(), v.size()); }

namespace detail {
const KernelTable& scalar_table();
#if defined(ANCER_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(ANCER_HAVE_NEON)
const KernelTable& neon_table();
#endif
}  // namespace detail

}  // namespace ancer::simd
