#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aperture/quadrature.hpp"

using namespace aperture;
namespace quad = aperture::quad;

namespace {

// int_T x^a y^b over the reference triangle = a! b! / (a+b+2)!.
double monomial_exact(int a, int b) {
  auto fact = [](int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

double apply_rule(const quad::TriangleRule& rule, int a, int b) {
  double acc = 0.0;
  for (const auto& p : rule.points) {
    const double x = p.bary[1], y = p.bary[2];
    acc += p.weight * std::pow(x, a) * std::pow(y, b);
  }
  return acc;
}

}  // namespace

TEST_CASE("order 1 is the centroid rule") {
  const auto& r = quad::cell_quadrature(1);
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].weight == doctest::Approx(0.5));
  CHECK(r.points[0].bary[0] == doctest::Approx(1.0 / 3));
}

TEST_CASE("order 2 integrates x^2 to 1/12") {
  CHECK(apply_rule(quad::cell_quadrature(2), 2, 0) ==
        doctest::Approx(1.0 / 12).epsilon(1e-13));
}

TEST_CASE("invalid orders are rejected") {
  CHECK_THROWS_AS(quad::cell_quadrature(0), std::invalid_argument);
  CHECK_THROWS_AS(quad::cell_quadrature(-3), std::invalid_argument);
  CHECK_THROWS_AS(quad::cell_quadrature(21), std::invalid_argument);
}

TEST_CASE("monomial exactness up to the declared order") {
  for (int order = 1; order <= 10; ++order) {
    const auto& rule = quad::cell_quadrature(order);
    double wsum = 0.0;
    for (const auto& p : rule.points) {
      CHECK(p.weight > 0.0);
      wsum += p.weight;
    }
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) {
        const double got = apply_rule(rule, a, b);
        const double want = monomial_exact(a, b);
        CHECK(std::abs(got - want) / want < 1e-13);
      }
    }
  }
}

TEST_CASE("gauss-legendre integrates high-degree polynomials") {
  const auto& g = quad::gauss_legendre(8);  // exact through degree 15
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) acc += g.w[i] * std::pow(g.x[i], 14);
  CHECK(acc == doctest::Approx(2.0 / 15).epsilon(1e-13));
}

TEST_CASE("mapped rule reproduces the cell area") {
  const Vec2 a(0.2, -0.3), b(1.4, 0.1), c(0.6, 1.1);
  double acc = 0.0;
  for (const auto& p : quad::map_rule(quad::cell_quadrature(4), a, b, c)) acc += p.w;
  CHECK(acc == doctest::Approx(quad::triangle_area(a, b, c)).epsilon(1e-14));
}
