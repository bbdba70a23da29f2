#include "ancer/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ancer/errors.hpp"
#include "ancer/simd.hpp"

namespace ancer {
namespace {

constexpr double kBoundarySlack = 1e-12;

void check_scale(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("region scale must be finite and non-negative");
}

void check_theta(std::span<const double> theta) {
  if (theta.empty()) throw DomainError("region theta is empty");
  for (double t : theta)
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("region theta entries must be positive");
}

double sum_log(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::log(x);
  return s;
}

// Norm family: 2 for ellipsoids and l2 balls, 1 for cross-polytopes and l1 balls.
int norm_family(RegionKind k) {
  switch (k) {
    case RegionKind::l2_ball:
    case RegionKind::ellipsoid:
      return 2;
    case RegionKind::l1_ball:
    case RegionKind::gen_cross_polytope:
      return 1;
    case RegionKind::empty:
      break;
  }
  return 0;
}

}  // namespace

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::empty:
      return "empty";
    case RegionKind::l1_ball:
      return "l1_ball";
    case RegionKind::l2_ball:
      return "l2_ball";
    case RegionKind::ellipsoid:
      return "ellipsoid";
    case RegionKind::gen_cross_polytope:
      return "gen_cross_polytope";
  }
  return "unknown";
}

std::string_view to_string(Containment c) {
  switch (c) {
    case Containment::superset:
      return "superset";
    case Containment::not_superset:
      return "not_superset";
    case Containment::undetermined:
      return "undetermined";
  }
  return "unknown";
}

Region Region::empty(std::size_t dim) { return Region{RegionKind::empty, dim, 0.0, {}}; }

Region Region::l1_ball(std::size_t dim, double radius) {
  check_scale(radius);
  if (radius == 0.0) return empty(dim);
  return Region{RegionKind::l1_ball, dim, radius, {}};
}

Region Region::l2_ball(std::size_t dim, double radius) {
  check_scale(radius);
  if (radius == 0.0) return empty(dim);
  return Region{RegionKind::l2_ball, dim, radius, {}};
}

Region Region::ellipsoid(std::vector<double> theta, double r) {
  check_theta(theta);
  check_scale(r);
  const std::size_t n = theta.size();
  if (r == 0.0) return empty(n);
  return Region{RegionKind::ellipsoid, n, r, std::move(theta)};
}

Region Region::cross_polytope(std::vector<double> theta, double r) {
  check_theta(theta);
  check_scale(r);
  const std::size_t n = theta.size();
  if (r == 0.0) return empty(n);
  return Region{RegionKind::gen_cross_polytope, n, r, std::move(theta)};
}

double Region::semi_axis(std::size_t i) const {
  if (i >= dim) throw InputShapeError("axis index out of range");
  if (is_empty()) return 0.0;
  if (is_ball()) return scale;
  return scale * theta[i];
}

bool contains(const Region& region, std::span<const double> delta) {
  if (delta.size() != region.dim) throw InputShapeError("contains: dimension mismatch");
  const auto& k = simd::kernels();
  const double r = region.scale;
  switch (region.kind) {
    case RegionKind::empty:
      return false;
    case RegionKind::l2_ball: {
      const double q = k.dot(delta.data(), delta.data(), delta.size());
      return q <= r * r * (1.0 + kBoundarySlack);
    }
    case RegionKind::l1_ball: {
      double s = 0.0;
      for (double d : delta) s += std::abs(d);
      return s <= r * (1.0 + kBoundarySlack);
    }
    case RegionKind::ellipsoid:
      return k.weighted_sq_norm(delta.data(), region.theta.data(), delta.size()) <=
             r * r * (1.0 + kBoundarySlack);
    case RegionKind::gen_cross_polytope:
      return k.weighted_l1_norm(delta.data(), region.theta.data(), delta.size()) <=
             r * (1.0 + kBoundarySlack);
  }
  return false;
}

double proxy_radius(const Region& region) {
  if (region.is_empty()) return 0.0;
  if (region.is_ball()) return region.scale;
  return region.scale * std::exp(sum_log(region.theta) / static_cast<double>(region.dim));
}

double log_volume(const Region& region) {
  if (region.is_empty()) return -std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(region.dim);
  const double r = region.scale;
  const double log_det = region.is_ball() ? 0.0 : sum_log(region.theta);
  switch (norm_family(region.kind)) {
    case 2:
      return n * std::log(r) + 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0) + log_det;
    case 1:
      return n * std::log(2.0 * r) - std::lgamma(n + 1.0) + log_det;
  }
  return -std::numeric_limits<double>::infinity();
}

Region max_enclosed_ball(const Region& region) {
  if (region.is_empty() || region.is_ball()) return region;
  const double radius = region.scale * *std::min_element(region.theta.begin(), region.theta.end());
  return region.kind == RegionKind::ellipsoid ? Region::l2_ball(region.dim, radius)
                                              : Region::l1_ball(region.dim, radius);
}

Comparison is_superior(const Region& a, const Region& b) {
  if (a.dim != b.dim) throw InputShapeError("is_superior: dimension mismatch");
  if (b.is_empty()) return {Containment::superset, !a.is_empty()};
  if (a.is_empty()) return {Containment::not_superset, false};
  if (norm_family(a.kind) != norm_family(b.kind)) return {Containment::undetermined, false};

  // Within one norm family every pair here is a scaled axis-aligned unit ball
  // of that norm, and such a set contains another iff its semi-axes dominate
  // on every axis (the other's extreme points are its axis points).
  bool dominates = true;
  bool strict = false;
  for (std::size_t i = 0; i < a.dim; ++i) {
    const double sa = a.semi_axis(i);
    const double sb = b.semi_axis(i);
    if (sa < sb) {
      dominates = false;
      break;
    }
    if (sa > sb) strict = true;
  }
  if (!dominates) return {Containment::not_superset, false};
  // For a ball b this is the enclosed-ball rule min_i theta_i r >= rho.
  return {Containment::superset, strict};
}

LogVolumeBounds cross_polytope_volume_bounds(std::span<const double> theta, double r) {
  check_theta(theta);
  if (!(r > 0.0)) throw DomainError("cross_polytope_volume_bounds: r must be positive");
  const double n = static_cast<double>(theta.size());
  const double log_zonotope = sum_log(theta);
  return {n * std::log(2.0 * r / n) + log_zonotope, n * std::log(2.0 * r) + log_zonotope};
}

McVolume mc_volume(const Region& region, std::size_t draws, RngStream& rng) {
  if (region.dim > 8) throw UnsupportedDimensionError("mc_volume supports at most 8 dimensions");
  if (region.is_empty()) return {0.0, 0.0};
  if (draws == 0) throw InvalidInputError("mc_volume needs at least one draw");
  std::vector<double> half(region.dim);
  double box = 1.0;
  for (std::size_t i = 0; i < region.dim; ++i) {
    half[i] = region.semi_axis(i);
    box *= 2.0 * half[i];
  }
  std::vector<double> point(region.dim);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    for (std::size_t i = 0; i < region.dim; ++i) point[i] = half[i] * rng.uniform_pm1();
    if (contains(region, point)) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(draws);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(draws))};
}

double ellipsoid_dual_norm(std::span<const double> z, std::span<const double> theta) {
  if (z.size() != theta.size()) throw InputShapeError("dual norm: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (z[i] * theta[i]) * (z[i] * theta[i]);
  return std::sqrt(s);
}

double cross_polytope_dual_norm(std::span<const double> z, std::span<const double> theta) {
  if (z.size() != theta.size()) throw InputShapeError("dual norm: dimension mismatch");
  return simd::kernels().weighted_linf_norm(z.data(), theta.data(), z.size());
}

}  // namespace ancer
