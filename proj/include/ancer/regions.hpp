#pragma once
// Certified-region geometry. Anisotropic regions are axis aligned:
//   ellipsoid            { d : sum_i (d_i / theta_i)^2 <= r^2 }
//   gen_cross_polytope   { d : sum_i |d_i| / theta_i   <= r }
// Isotropic balls carry their radius in `scale` and no theta.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ancer/rng.hpp"

namespace ancer {

enum class RegionKind { empty, l1_ball, l2_ball, ellipsoid, gen_cross_polytope };

std::string_view to_string(RegionKind kind);

struct Region {
  RegionKind kind = RegionKind::empty;
  std::size_t dim = 0;
  double scale = 0.0;
  std::vector<double> theta;

  static Region empty(std::size_t dim);
  static Region l1_ball(std::size_t dim, double radius);
  static Region l2_ball(std::size_t dim, double radius);
  static Region ellipsoid(std::vector<double> theta, double r);
  static Region cross_polytope(std::vector<double> theta, double r);

  bool is_empty() const noexcept { return kind == RegionKind::empty; }
  bool is_ball() const noexcept { return kind == RegionKind::l1_ball || kind == RegionKind::l2_ball; }
  // Half-length of the region along axis i.
  double semi_axis(std::size_t i) const;
};

// Boundary points count as contained (relative slack 1e-12 on the defining
// inequality).
bool contains(const Region& region, std::span<const double> delta);

// r * geomean(theta) for anisotropic regions, the radius for balls, 0 when
// empty.
double proxy_radius(const Region& region);

// -infinity for the empty region.
double log_volume(const Region& region);

// Largest ball of the matching norm inside the region (l2 for ellipsoids,
// l1 for generalized cross-polytopes).
Region max_enclosed_ball(const Region& region);

enum class Containment { superset, not_superset, undetermined };
std::string_view to_string(Containment c);

struct Comparison {
  Containment verdict = Containment::undetermined;
  // a strictly exceeds b along at least one axis (only meaningful for supersets).
  bool strict = false;
};

// Whether region a contains region b (non-strict).
Comparison is_superior(const Region& a, const Region& b);

struct LogVolumeBounds {
  double log_lower = 0.0;
  double log_upper = 0.0;
};

// Zonotope sandwich for { d : ||Lambda^{-1} d||_1 <= r } with diagonal Lambda:
// (2r/n)^n prod theta <= V <= (2r)^n prod theta.
LogVolumeBounds cross_polytope_volume_bounds(std::span<const double> theta, double r);

struct McVolume {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Rejection-sampling volume over the region's bounding box. Test oracle only;
// dim must be at most 8.
McVolume mc_volume(const Region& region, std::size_t draws, RngStream& rng);

// Dual norms of the region norms: sup { z.x : ||x||_{theta,2} <= 1 } and
// sup { z.x : ||x||_{theta,1} <= 1 }.
double ellipsoid_dual_norm(std::span<const double> z, std::span<const double> theta);
double cross_polytope_dual_norm(std::span<const double> z, std::span<const double> theta);

}  // namespace ancer
