#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <stdexcept>
#include <vector>

#include "ancer/rng.hpp"
#include "ancer/simd.hpp"

using namespace ancer;
using simd::Isa;

namespace {

std::vector<double> random_vec(RngStream& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform01();
  return v;
}

void check_close(double a, double b) { CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b))); }

void compare_tables(const simd::KernelTable& ref, const simd::KernelTable& t) {
  RngStream rng(11, 0);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto a = random_vec(rng, n, -3, 3), b = random_vec(rng, n, -3, 3);
    const auto th = random_vec(rng, n, 0.1, 2.0);
    check_close(t.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n));
    check_close(t.weighted_sq_norm(a.data(), th.data(), n), ref.weighted_sq_norm(a.data(), th.data(), n));
    check_close(t.weighted_l1_norm(a.data(), th.data(), n), ref.weighted_l1_norm(a.data(), th.data(), n));
    CHECK(t.weighted_linf_norm(a.data(), th.data(), n) == ref.weighted_linf_norm(a.data(), th.data(), n));

    auto y1 = b, y2 = b;
    ref.axpy(0.37, a.data(), y1.data(), n);
    t.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) check_close(y2[i], y1[i]);

    std::vector<double> o1(n), o2(n);
    ref.scale_add(a.data(), th.data(), b.data(), o1.data(), n);
    t.scale_add(a.data(), th.data(), b.data(), o2.data(), n);
    for (std::size_t i = 0; i < n; ++i) check_close(o2[i], o1[i]);

    auto r1 = a, r2 = a;
    ref.relu(r1.data(), n);
    t.relu(r2.data(), n);
    CHECK(r1 == r2);
  }
}

}  // namespace

TEST_CASE("scalar kernels against hand values") {
  const auto& k = simd::kernels(Isa::scalar);
  const double a[] = {1, -2, 3}, b[] = {4, 5, -6}, th[] = {0.5, 2, 1};
  CHECK(k.dot(a, b, 3) == doctest::Approx(4 - 10 - 18));
  CHECK(k.weighted_sq_norm(a, th, 3) == doctest::Approx(4 + 1 + 9));
  CHECK(k.weighted_l1_norm(a, th, 3) == doctest::Approx(2 + 1 + 3));
  CHECK(k.weighted_linf_norm(a, th, 3) == doctest::Approx(4));
  double v[] = {-1, 0, 2};
  k.relu(v, 3);
  CHECK(v[0] == 0.0);
  CHECK(v[2] == 2.0);
}

TEST_CASE("vector kernels match the scalar reference") {
  const auto& ref = simd::kernels(Isa::scalar);
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (!simd::isa_available(isa)) {
      CHECK_THROWS_AS(simd::kernels(isa), std::invalid_argument);
      continue;
    }
    CAPTURE(simd::isa_name(isa));
    compare_tables(ref, simd::kernels(isa));
  }
}

TEST_CASE("active isa is available") {
  CHECK(simd::isa_available(simd::active_isa()));
  CHECK(simd::isa_available(Isa::scalar));
}

TEST_CASE("ANCER_ISA pins the selection") {
  const char* forced = std::getenv("ANCER_ISA");
  if (forced && std::string(forced) == "scalar") CHECK(simd::active_isa() == Isa::scalar);
}
