#pragma once
// Smoothing distributions with diagonal scale parameters.
//   gaussian: x + theta .* eps, eps ~ N(0, I)        (Sigma = diag(theta^2))
//   uniform:  x + theta .* eps, eps ~ U[-1, 1]^n     (Lambda = diag(theta))
//   gmm:      component k ~ alpha, then the gaussian rule with theta_k

#include <span>
#include <string_view>
#include <vector>

#include "ancer/rng.hpp"

namespace ancer {

enum class SmoothingKind { gaussian, uniform, gmm };

std::string_view to_string(SmoothingKind kind);
SmoothingKind parse_smoothing_kind(std::string_view name);

struct GmmComponent {
  double weight = 1.0;
  std::vector<double> theta;
};

struct SmoothingSpec {
  SmoothingKind kind = SmoothingKind::gaussian;
  // gaussian/uniform: per-axis scale. gmm: sqrt of the effective matrix
  // diagonal (kept so every spec serializes to one theta row).
  std::vector<double> theta;
  std::vector<GmmComponent> components;

  std::size_t dim() const noexcept { return theta.size(); }

  static SmoothingSpec gaussian(std::vector<double> sigma);
  static SmoothingSpec uniform(std::vector<double> lambda);
  static SmoothingSpec gmm(std::vector<GmmComponent> components);
  static SmoothingSpec isotropic(SmoothingKind kind, std::size_t dim, double scale);
};

// Throws DomainError on non-positive scales or bad mixture weights.
void validate(const SmoothingSpec& spec);

// Diagonal b of B with B^{-1} = sum_k alpha_k Sigma_k^{-1}.
std::vector<double> gmm_effective_matrix(std::span<const GmmComponent> components);

// Draws one perturbation. eps_raw receives the parameter-free noise, so that
// x_perturbed = x + theta .* eps_raw for the theta that was used.
void sample_perturbed(const SmoothingSpec& spec, std::span<const double> x, RngStream& rng,
                      std::span<double> eps_raw, std::span<double> x_perturbed);

namespace detail {
// Same as sample_perturbed without validation; for callers that validated the
// spec and shapes once up front.
void sample_perturbed_unchecked(const SmoothingSpec& spec, std::span<const double> x,
                                RngStream& rng, std::span<double> eps_raw,
                                std::span<double> x_perturbed);
}  // namespace detail

// Parameter-free noise for the gaussian/uniform families.
void draw_noise(SmoothingKind kind, RngStream& rng, std::span<double> eps);

}  // namespace ancer
