#pragma once

#include <cstdint>

namespace ancer::stats {

double std_normal_pdf(double x);

// Phi(x), via the complementary error function.
double std_normal_cdf(double x);

// Phi^{-1}(p) for p in (0, 1): rational approximation refined by one Newton
// step on std_normal_cdf. Throws DomainError outside (0, 1).
double std_normal_icdf(double p);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// P[Binomial(n, p) >= k].
double binomial_upper_tail(std::uint64_t k, std::uint64_t n, double p);

// One-sided exact (Clopper-Pearson) lower confidence bound on a binomial
// proportion: the largest p with P[Binomial(n, p) >= k] <= alpha.
double clopper_pearson_lower(std::uint64_t k, std::uint64_t n, double alpha);

}  // namespace ancer::stats
