// NEON (AArch64) variants; 2 doubles per register.
#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "ancer/simd.hpp"

namespace ancer::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_add(const double* x, const double* theta, const double* eps, double* out,
               std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(x + i), vld1q_f64(theta + i), vld1q_f64(eps + i)));
  for (; i < n; ++i) out[i] = x[i] + theta[i] * eps[i];
}

double weighted_sq_norm(const double* d, const double* theta, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t q = vdivq_f64(vld1q_f64(d + i), vld1q_f64(theta + i));
    acc = vfmaq_f64(acc, q, q);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double q = d[i] / theta[i];
    s += q * q;
  }
  return s;
}

double weighted_l1_norm(const double* d, const double* theta, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vaddq_f64(acc, vdivq_f64(vabsq_f64(vld1q_f64(d + i)), vld1q_f64(theta + i)));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::abs(d[i]) / theta[i];
  return s;
}

double weighted_linf_norm(const double* d, const double* theta, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vmaxq_f64(acc, vmulq_f64(vabsq_f64(vld1q_f64(d + i)), vld1q_f64(theta + i)));
  double m = vmaxvq_f64(acc);
  for (; i < n; ++i) m = std::max(m, std::abs(d[i]) * theta[i]);
  return m;
}

void relu(double* v, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(v + i, vmaxnmq_f64(vld1q_f64(v + i), zero));
  for (; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{dot,      axpy,           scale_add, weighted_sq_norm,
                                 weighted_l1_norm, weighted_linf_norm, relu};
  return table;
}

}  // namespace ancer::simd::detail
