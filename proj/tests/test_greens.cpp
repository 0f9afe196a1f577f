#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aperture/greens.hpp"

using namespace aperture;
namespace greens = aperture::greens;

namespace {

std::mt19937 rng(42);

Vec3 random_point(double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

CVec3 fd_gradient(const std::function<Complex(const Vec3&)>& f, const Vec3& r,
                  double h) {
  CVec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    g[a] = (f(r + e) - f(r - e)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("free-space values at unit separation") {
  const Vec3 r(1, 0, 0), rp(0, 0, 0);
  CHECK(greens::g_free(r, rp, 0.0).real() == doctest::Approx(1.0 / (4 * kPi)));
  CHECK(greens::g_free(r, rp, kPi).real() == doctest::Approx(-1.0 / (4 * kPi)));
  CHECK(std::abs(greens::g_free(r, rp, kPi).imag()) < 1e-15);
}

TEST_CASE("modulus is 1/(4 pi R) for any k") {
  for (double k : {0.0, 0.7, 3.1}) {
    const Vec3 r = random_point(), rp = random_point() + Vec3(2, 0, 0);
    const double R = (r - rp).norm();
    CHECK(std::abs(greens::g_free(r, rp, k)) ==
          doctest::Approx(1.0 / (4 * kPi * R)).epsilon(1e-13));
  }
}

TEST_CASE("kernel symmetry in its arguments") {
  for (int i = 0; i < 10; ++i) {
    const Vec3 r = random_point(), rp = random_point() + Vec3(1.5, 0.2, 0);
    CHECK(std::abs(greens::g_free(r, rp, 1.3) - greens::g_free(rp, r, 1.3)) < 1e-16);
  }
}

TEST_CASE("coincident points are rejected") {
  const Vec3 r(0.5, 0.2, 0.1);
  CHECK_THROWS_AS(greens::g_free(r, r, 1.0), std::domain_error);
  CHECK_THROWS_AS(greens::grad_g(r, r, 1.0), std::domain_error);
}

TEST_CASE("static gradient at unit separation") {
  const CVec3 g = greens::grad_g(Vec3(1, 0, 0), Vec3(0, 0, 0), 0.0);
  CHECK(g[0].real() == doctest::Approx(-1.0 / (4 * kPi)).epsilon(1e-13));
  CHECK(std::abs(g[1]) < 1e-15);
  CHECK(std::abs(g[2]) < 1e-15);
}

TEST_CASE("gradient matches central differences") {
  const double k = 1.7, h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const Vec3 rp = random_point();
    const Vec3 r = rp + random_point().normalized() * (1.0 + i * 0.01);
    const CVec3 got = greens::grad_g(r, rp, k);
    const CVec3 fd =
        fd_gradient([&](const Vec3& p) { return greens::g_free(p, rp, k); }, r, h);
    CHECK((got - fd).norm() / fd.norm() < 1e-6);
  }
}

TEST_CASE("gradient antisymmetry in the two arguments") {
  const double k = 0.9;
  const Vec3 r = random_point(), rp = random_point() + Vec3(0, 2, 0);
  const CVec3 grad_r = greens::grad_g(r, rp, k);
  const double h = 1e-6;
  CVec3 grad_rp;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    grad_rp[a] = (greens::g_free(r, rp + e, k) - greens::g_free(r, rp - e, k)) / (2 * h);
  }
  CHECK((grad_r + grad_rp).norm() / grad_r.norm() < 1e-7);
}

TEST_CASE("hessian matches central differences") {
  const double k = 1.3, h = 2e-4;
  const Vec3 rp(0.1, -0.2, 0.3);
  const Vec3 r = rp + Vec3(1.1, 0.4, -0.8);
  const CMat3 got = greens::hessian_g(r, rp, k);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Vec3 ea = Vec3::Zero(), eb = Vec3::Zero();
      ea[a] = h;
      eb[b] = h;
      const Complex fd = (greens::g_free(r + ea + eb, rp, k) -
                          greens::g_free(r + ea - eb, rp, k) -
                          greens::g_free(r - ea + eb, rp, k) +
                          greens::g_free(r - ea - eb, rp, k)) /
                         (4 * h * h);
      CHECK(std::abs(got(a, b) - fd) / std::abs(fd) < 1e-6);
    }
}

TEST_CASE("dyadic is symmetric and rejects k = 0") {
  const Vec3 r(0.9, 0.1, 0.5), rp(-0.3, 0.4, -0.2);
  const CMat3 g = greens::dyadic_G(r, rp, 2.1);
  CHECK((g - g.transpose()).norm() < 1e-14 * g.norm());
  CHECK_THROWS_AS(greens::dyadic_G(r, rp, 0.0), std::invalid_argument);
}

TEST_CASE("dyadic trace equals 2g away from the source") {
  // trace(G) = 3g + (Laplacian g)/k^2 = 2g since (Laplacian + k^2) g = 0.
  const double k = 1.6;
  const Vec3 r(1.2, -0.4, 0.8), rp(0.1, 0.3, -0.1);
  const Complex tr = greens::dyadic_G(r, rp, k).trace();
  CHECK(std::abs(tr - 2.0 * greens::g_free(r, rp, k)) < 1e-12);
}

TEST_CASE("far-field dyadic approaches the transverse projector") {
  const double k = 1.0;
  const Vec3 rp(0.05, -0.1, 0.0);
  const Vec3 rh = Vec3(0.3, 0.2, 0.93).normalized();
  for (double kr : {50.0, 200.0}) {
    const Vec3 r = (kr / k) * rh;
    const Vec3 rhat = (r - rp).normalized();
    const CMat3 got = greens::dyadic_G(r, rp, k);
    const CMat3 want =
        (Eigen::Matrix3d::Identity() - rhat * rhat.transpose()).cast<Complex>() *
        greens::g_free(r, rp, k);
    CHECK((got - want).norm() / want.norm() < 3.0 / kr);
  }
}

TEST_CASE("half-space dyadic: on-plane tangential doubling") {
  const double k = 1.2;
  const Vec3 r(0.7, -0.2, 0.0), rp(-0.1, 0.4, 0.0);
  const CMat3 g2 = greens::dyadic_G2_plus(r, rp, k);
  const CMat3 g = greens::dyadic_G(r, rp, k);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(std::abs(g2(a, b) - 2.0 * g(a, b)) < 1e-12 * std::abs(g(a, b)));
}

TEST_CASE("half-space dyadic: curl boundary condition at the plane") {
  // e3 x (curl_r G2+) = 0 at r3 = 0, curl taken columnwise (finite
  // differences adjudicate the convention).
  const double k = 1.4, h = 1e-5;
  const Vec3 rp(0.2, -0.1, 0.6);
  const Vec3 r0(0.9, 0.5, 0.0);
  for (int col = 0; col < 3; ++col) {
    auto column = [&](const Vec3& r) -> CVec3 {
      return greens::dyadic_G2_plus(r, rp, k).col(col);
    };
    CVec3 curl;
    std::array<CVec3, 3> dp, dm;
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      dp[a] = column(r0 + e);
      dm[a] = column(r0 - e);
    }
    auto d = [&](int a, int comp) { return (dp[a][comp] - dm[a][comp]) / (2 * h); };
    curl[0] = d(1, 2) - d(2, 1);
    curl[1] = d(2, 0) - d(0, 2);
    curl[2] = d(0, 1) - d(1, 0);
    // e3 x curl has components (-curl_y, curl_x, 0)
    CHECK(std::abs(curl[0]) < 1e-8);
    CHECK(std::abs(curl[1]) < 1e-8);
  }
}

TEST_CASE("reflection identity for the lower dyadic") {
  const double k = 0.8;
  const Vec3 r(0.3, 0.1, -0.7), rp(-0.2, 0.5, 0.4);
  const CMat3 lhs = greens::dyadic_G2_minus(r, rp, k);
  const CMat3 rhs = greens::dyadic_G2_plus(greens::reflect(r), rp, k);
  CHECK((lhs - rhs).norm() == 0.0);
}

TEST_CASE("columns of G2+ satisfy the vector Helmholtz equation") {
  const double k = 1.1, h = 2e-4;
  const Vec3 rp(0.1, 0.2, 0.5);
  const Vec3 r(1.0, -0.6, 0.9);
  for (int col = 0; col < 3; ++col) {
    auto column = [&](const Vec3& p) -> CVec3 {
      return greens::dyadic_G2_plus(p, rp, k).col(col);
    };
    CVec3 lap = -6.0 * column(r);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      lap += column(r + e) + column(r - e);
    }
    lap /= h * h;
    const CVec3 resid = lap + k * k * column(r);
    CHECK(resid.norm() / (k * k * column(r).norm()) < 1e-6);
  }
}
