#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ancer/errors.hpp"
#include "ancer/regions.hpp"
#include "ancer/rng.hpp"

using namespace ancer;

namespace {

std::vector<double> random_theta(RngStream& rng, std::size_t n) {
  std::vector<double> t(n);
  for (auto& v : t) v = 0.2 + 1.8 * rng.uniform01();
  return t;
}

}  // namespace

TEST_CASE("membership") {
  const Region e = Region::ellipsoid({1, 2}, 1);
  CHECK(contains(e, std::vector<double>{0, 0}));
  CHECK(contains(e, std::vector<double>{0, 2}));
  CHECK(!contains(e, std::vector<double>{0, 2.001}));
  const Region c = Region::cross_polytope({1, 2}, 1);
  CHECK(contains(c, std::vector<double>{0.5, 1.0}));
  CHECK(!contains(c, std::vector<double>{0.5, 1.01}));
  const Region z = Region::empty(2);
  CHECK(!contains(z, std::vector<double>{0, 0}));
  CHECK(Region::l2_ball(2, 0.0).is_empty());
  CHECK_THROWS_AS(contains(e, std::vector<double>{0, 0, 0}), InputShapeError);
  CHECK_THROWS_AS(Region::ellipsoid({1, -2}, 1), DomainError);
}

TEST_CASE("proxy radius") {
  CHECK(std::abs(proxy_radius(Region::ellipsoid({0.1, 0.4}, 1)) - 0.2) < 1e-15);
  CHECK(std::abs(proxy_radius(Region::ellipsoid({0.3, 0.3, 0.3}, 2)) - 0.6) < 1e-15);
  RngStream rng(1, 0);
  const auto t = random_theta(rng, 5);
  CHECK(proxy_radius(Region::cross_polytope(t, 2.0)) ==
        doctest::Approx(2.0 * proxy_radius(Region::cross_polytope(t, 1.0))).epsilon(1e-14));
  CHECK(proxy_radius(Region::l1_ball(3, 0.7)) == 0.7);
  CHECK(proxy_radius(Region::empty(3)) == 0.0);
}

TEST_CASE("volume closed forms") {
  CHECK(std::abs(log_volume(Region::cross_polytope({1, 1}, 1)) - std::log(2.0)) < 1e-14);
  CHECK(std::abs(log_volume(Region::ellipsoid({1, 1}, 1)) - std::log(std::numbers::pi)) < 1e-14);
  CHECK(std::abs(log_volume(Region::l1_ball(3, 1)) - std::log(4.0 / 3.0)) < 1e-14);
  CHECK(std::abs(log_volume(Region::l2_ball(3, 1)) - std::log(4.0 / 3.0 * std::numbers::pi)) < 1e-14);
  CHECK(std::isinf(log_volume(Region::empty(2))));
  RngStream rng(2, 0);
  for (std::size_t n : {2u, 5u}) {
    const auto t = random_theta(rng, n);
    auto t2 = t;
    for (auto& v : t2) v *= 1.7;
    CHECK(log_volume(Region::ellipsoid(t2, 0.9)) ==
          doctest::Approx(log_volume(Region::ellipsoid(t, 0.9)) + n * std::log(1.7)).epsilon(1e-13));
    CHECK(log_volume(Region::cross_polytope(t2, 0.9)) ==
          doctest::Approx(log_volume(Region::cross_polytope(t, 0.9)) + n * std::log(1.7)).epsilon(1e-13));
  }
}

TEST_CASE("volume against the MC oracle") {
  RngStream rng(3, 0);
  RngStream mc(3, 1);
  const auto disk = mc_volume(Region::l2_ball(2, 1), 1000000, mc);
  CHECK(std::abs(disk.estimate / std::numbers::pi - 1.0) < 0.02);
  const auto oct = mc_volume(Region::l1_ball(3, 1), 1000000, mc);
  CHECK(std::abs(oct.estimate / (4.0 / 3.0) - 1.0) < 0.02);
  CHECK(mc_volume(Region::empty(2), 10, mc).estimate == 0.0);
  CHECK_THROWS_AS(mc_volume(Region::l2_ball(9, 1), 10, mc), UnsupportedDimensionError);
  for (int i = 0; i < 6; ++i) {
    const std::size_t n = 2 + i % 3;
    const auto t = random_theta(rng, n);
    const double r = 0.5 + rng.uniform01();
    for (const Region& reg : {Region::ellipsoid(t, r), Region::cross_polytope(t, r)}) {
      const auto est = mc_volume(reg, 200000, mc);
      CHECK(std::abs(est.estimate - std::exp(log_volume(reg))) <= 4.0 * est.std_error);
    }
  }
}

TEST_CASE("cross-polytope volume bounds") {
  const auto b = cross_polytope_volume_bounds(std::vector<double>{1, 1}, 1);
  CHECK(std::abs(b.log_lower - 0.0) < 1e-15);
  CHECK(std::abs(b.log_upper - std::log(4.0)) < 1e-15);
  const auto b1 = cross_polytope_volume_bounds(std::vector<double>{0.7}, 1.3);
  const double exact1 = log_volume(Region::cross_polytope({0.7}, 1.3));
  CHECK(std::abs(b1.log_lower - exact1) < 1e-14);
  CHECK(std::abs(b1.log_upper - exact1) < 1e-14);
  RngStream rng(4, 0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.below(8);
    const auto t = random_theta(rng, n);
    const double r = 0.1 + 3.0 * rng.uniform01();
    const double exact = log_volume(Region::cross_polytope(t, r));
    const auto bb = cross_polytope_volume_bounds(t, r);
    CHECK(bb.log_lower <= exact + 1e-12);
    CHECK(exact <= bb.log_upper + 1e-12);
  }
}

TEST_CASE("max enclosed ball") {
  const Region e = Region::ellipsoid({0.4, 0.6}, 1);
  const Region b = max_enclosed_ball(e);
  CHECK(b.kind == RegionKind::l2_ball);
  CHECK(std::abs(b.scale - 0.4) < 1e-15);
  const Region iso = Region::l2_ball(2, 0.8);
  CHECK(max_enclosed_ball(iso).scale == 0.8);
  CHECK(std::abs(max_enclosed_ball(Region::cross_polytope({0.5, 0.5}, 0.6)).scale - 0.3) < 1e-15);
  // boundary of the returned ball lies inside
  RngStream rng(5, 0);
  for (int i = 0; i < 500; ++i) {
    const auto t = random_theta(rng, 3);
    const Region reg = (i % 2) ? Region::ellipsoid(t, 0.8) : Region::cross_polytope(t, 0.8);
    const Region ball = max_enclosed_ball(reg);
    std::vector<double> d(3);
    double norm = 0.0;
    for (auto& v : d) {
      v = rng.normal();
      norm += (i % 2) ? v * v : std::abs(v);
    }
    norm = (i % 2) ? std::sqrt(norm) : norm;
    for (auto& v : d) v *= ball.scale / norm;
    CHECK(contains(reg, d));
  }
}

TEST_CASE("superior certificates") {
  const Region e = Region::ellipsoid({0.4, 0.6}, 1);
  CHECK(is_superior(e, Region::l2_ball(2, 0.3)).verdict == Containment::superset);
  CHECK(is_superior(e, Region::l2_ball(2, 0.3)).strict);
  CHECK(is_superior(e, Region::l2_ball(2, 0.5)).verdict == Containment::not_superset);
  CHECK(!contains(e, std::vector<double>{0.5, 0}));
  const auto self = is_superior(e, e);
  CHECK(self.verdict == Containment::superset);
  CHECK(!self.strict);
  CHECK(is_superior(e, Region::cross_polytope({0.4, 0.6}, 1)).verdict == Containment::undetermined);
  CHECK(is_superior(e, Region::empty(2)).verdict == Containment::superset);
  CHECK(is_superior(Region::empty(2), e).verdict == Containment::not_superset);
  CHECK(is_superior(Region::ellipsoid({0.5, 0.7}, 1), e).verdict == Containment::superset);
  CHECK(is_superior(Region::ellipsoid({0.5, 0.5}, 1), e).verdict == Containment::not_superset);
  CHECK(is_superior(Region::cross_polytope({1, 2}, 1), Region::l1_ball(2, 1)).verdict == Containment::superset);
  CHECK(is_superior(Region::cross_polytope({1, 2}, 1), Region::l1_ball(2, 1.1)).verdict == Containment::not_superset);

  // superset verdicts agree with sampled membership
  RngStream rng(6, 0);
  for (int i = 0; i < 200; ++i) {
    const Region a = Region::ellipsoid(random_theta(rng, 2), 1);
    const Region b = Region::l2_ball(2, 0.2 + 1.5 * rng.uniform01());
    const bool sup = is_superior(a, b).verdict == Containment::superset;
    bool all_in = true;
    for (int j = 0; j < 400; ++j) {
      const double ang = 2 * std::numbers::pi * j / 400;
      all_in &= contains(a, std::vector<double>{b.scale * std::cos(ang), b.scale * std::sin(ang)});
    }
    CHECK(sup == all_in);
  }
}

TEST_CASE("dual norms") {
  RngStream rng(7, 0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng.below(4);
    const auto t = random_theta(rng, n);
    std::vector<double> z(n);
    for (auto& v : z) v = rng.uniform_pm1();
    // vertices +-theta_i e_i of the unit cross-polytope
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) best = std::max(best, std::abs(z[j]) * t[j]);
    CHECK(std::abs(cross_polytope_dual_norm(z, t) - best) < 1e-15);
    // ellipsoid: the maximizer is x_i = theta_i^2 z_i / ||theta z||, and random
    // boundary points never exceed it
    const double dn = ellipsoid_dual_norm(z, t);
    double attained = 0.0;
    for (std::size_t j = 0; j < n; ++j) attained += t[j] * t[j] * z[j] * z[j] / dn;
    CHECK(std::abs(attained - dn) < 1e-12);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> u(n);
      double norm = 0.0;
      for (auto& v : u) norm += (v = rng.normal()) * v;
      double val = 0.0;
      for (std::size_t j = 0; j < n; ++j) val += z[j] * t[j] * u[j] / std::sqrt(norm);
      CHECK(val <= dn + 1e-12);
    }
  }
}
