// AVX2/FMA variants. Compiled with -mavx2 -mfma; only reached after the
// dispatcher has confirmed CPU support.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "ancer/simd.hpp"

namespace ancer::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_add(const double* x, const double* theta, const double* eps, double* out,
               std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_fmadd_pd(_mm256_loadu_pd(theta + i), _mm256_loadu_pd(eps + i),
                                      _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = x[i] + theta[i] * eps[i];
}

double weighted_sq_norm(const double* d, const double* theta, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d q = _mm256_div_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(theta + i));
    acc = _mm256_fmadd_pd(q, q, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double q = d[i] / theta[i];
    s += q * q;
  }
  return s;
}

double weighted_l1_norm(const double* d, const double* theta, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_div_pd(abs_pd(_mm256_loadu_pd(d + i)),
                                           _mm256_loadu_pd(theta + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::abs(d[i]) / theta[i];
  return s;
}

double weighted_linf_norm(const double* d, const double* theta, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_max_pd(acc, _mm256_mul_pd(abs_pd(_mm256_loadu_pd(d + i)),
                                           _mm256_loadu_pd(theta + i)));
  double m = hmax(acc);
  for (; i < n; ++i) m = std::max(m, std::abs(d[i]) * theta[i]);
  return m;
}

void relu(double* v, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(v + i, _mm256_max_pd(_mm256_loadu_pd(v + i), zero));
  for (; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{dot,      axpy,           scale_add, weighted_sq_norm,
                                 weighted_l1_norm, weighted_linf_norm, relu};
  return table;
}

}  // namespace ancer::simd::detail
