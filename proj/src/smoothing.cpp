#include "ancer/smoothing.hpp"

#include <cmath>
#include <string>

#include "ancer/errors.hpp"
#include "ancer/simd.hpp"

namespace ancer {

std::string_view to_string(SmoothingKind kind) {
  switch (kind) {
    case SmoothingKind::gaussian:
      return "gaussian";
    case SmoothingKind::uniform:
      return "uniform";
    case SmoothingKind::gmm:
      return "gmm";
  }
  return "unknown";
}

SmoothingKind parse_smoothing_kind(std::string_view name) {
  if (name == "gaussian") return SmoothingKind::gaussian;
  if (name == "uniform") return SmoothingKind::uniform;
  if (name == "gmm") return SmoothingKind::gmm;
  throw ParseError("unknown smoothing kind '" + std::string(name) + "'");
}

SmoothingSpec SmoothingSpec::gaussian(std::vector<double> sigma) {
  SmoothingSpec s{SmoothingKind::gaussian, std::move(sigma), {}};
  validate(s);
  return s;
}

SmoothingSpec SmoothingSpec::uniform(std::vector<double> lambda) {
  SmoothingSpec s{SmoothingKind::uniform, std::move(lambda), {}};
  validate(s);
  return s;
}

SmoothingSpec SmoothingSpec::gmm(std::vector<GmmComponent> components) {
  SmoothingSpec s{SmoothingKind::gmm, {}, std::move(components)};
  const auto b = gmm_effective_matrix(s.components);
  s.theta.reserve(b.size());
  for (double v : b) s.theta.push_back(std::sqrt(v));
  validate(s);
  return s;
}

SmoothingSpec SmoothingSpec::isotropic(SmoothingKind kind, std::size_t dim, double scale) {
  if (kind == SmoothingKind::gmm) throw SpecKindError("isotropic gmm specs need explicit components");
  SmoothingSpec s{kind, std::vector<double>(dim, scale), {}};
  validate(s);
  return s;
}

namespace {

void check_theta(std::span<const double> theta, const char* what) {
  if (theta.empty()) throw DomainError(std::string(what) + " is empty");
  for (double t : theta)
    if (!(t > 0.0) || !std::isfinite(t))
      throw DomainError(std::string(what) + " entries must be finite and strictly positive");
}

}  // namespace

void validate(const SmoothingSpec& spec) {
  check_theta(spec.theta, "theta");
  if (spec.kind != SmoothingKind::gmm) return;
  if (spec.components.empty()) throw DomainError("gmm spec needs at least one component");
  double total = 0.0;
  for (const GmmComponent& c : spec.components) {
    if (!(c.weight > 0.0 && c.weight <= 1.0)) throw DomainError("gmm weights must lie in (0, 1]");
    if (c.theta.size() != spec.theta.size()) throw DomainError("gmm component dimensions differ");
    check_theta(c.theta, "gmm component theta");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("gmm weights must sum to 1");
}

std::vector<double> gmm_effective_matrix(std::span<const GmmComponent> components) {
  if (components.empty()) throw DomainError("gmm_effective_matrix: empty component list");
  const std::size_t n = components.front().theta.size();
  std::vector<double> inv(n, 0.0);
  for (const GmmComponent& c : components) {
    if (c.theta.size() != n) throw DomainError("gmm component dimensions differ");
    check_theta(c.theta, "gmm component theta");
    for (std::size_t i = 0; i < n; ++i) inv[i] += c.weight / (c.theta[i] * c.theta[i]);
  }
  for (double& v : inv) v = 1.0 / v;
  return inv;
}

void draw_noise(SmoothingKind kind, RngStream& rng, std::span<double> eps) {
  if (kind == SmoothingKind::uniform) {
    for (double& e : eps) e = rng.uniform_pm1();
  } else {
    for (double& e : eps) e = rng.normal();
  }
}

void sample_perturbed(const SmoothingSpec& spec, std::span<const double> x, RngStream& rng,
                      std::span<double> eps_raw, std::span<double> x_perturbed) {
  validate(spec);
  const std::size_t n = spec.dim();
  if (x.size() != n || eps_raw.size() != n || x_perturbed.size() != n)
    throw InputShapeError("sample_perturbed: dimension mismatch");
  detail::sample_perturbed_unchecked(spec, x, rng, eps_raw, x_perturbed);
}

void detail::sample_perturbed_unchecked(const SmoothingSpec& spec, std::span<const double> x,
                                        RngStream& rng, std::span<double> eps_raw,
                                        std::span<double> x_perturbed) {
  const std::size_t n = spec.dim();
  const double* scale = spec.theta.data();
  if (spec.kind == SmoothingKind::gmm) {
    // Always consume the selection variate, even for a single component.
    const double u = rng.uniform01();
    std::size_t chosen = spec.components.size() - 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.components.size(); ++k) {
      acc += spec.components[k].weight;
      if (u < acc) {
        chosen = k;
        break;
      }
    }
    scale = spec.components[chosen].theta.data();
  }
  draw_noise(spec.kind, rng, eps_raw);
  simd::kernels().scale_add(x.data(), scale, eps_raw.data(), x_perturbed.data(), n);
}

}  // namespace ancer
