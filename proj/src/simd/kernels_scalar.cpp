#include <algorithm>
#include <cmath>

#include "ancer/simd.hpp"

namespace ancer::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_add(const double* x, const double* theta, const double* eps, double* out,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + theta[i] * eps[i];
}

double weighted_sq_norm(const double* d, const double* theta, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = d[i] / theta[i];
    s += q * q;
  }
  return s;
}

double weighted_l1_norm(const double* d, const double* theta, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(d[i]) / theta[i];
  return s;
}

double weighted_linf_norm(const double* d, const double* theta, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(d[i]) * theta[i]);
  return m;
}

void relu(double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot,      axpy,           scale_add, weighted_sq_norm,
                                 weighted_l1_norm, weighted_linf_norm, relu};
  return table;
}

}  // namespace ancer::simd::detail
