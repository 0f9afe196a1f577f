#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aperture/fields.hpp"

using namespace aperture;
namespace vbie = aperture::vector_bie;
namespace geo = aperture::geo;

namespace {

struct Solved {
  geo::ApertureMesh mesh;
  geo::DofTable dofs;
  vbie::WaveContext wave;
  vbie::VectorDensity w;
};

Solved solve_disc(double h, double k = 1.0) {
  Solved s;
  geo::ApertureSpec spec;
  spec.shape = geo::Disc{1.0};
  s.mesh = geo::build_mesh(spec, h);
  s.dofs = geo::build_dofs(s.mesh);
  s.wave = vbie::WaveContext::make(k, Vec3(0, 0, -1), Vec3(1, 0, 0));
  s.w = vbie::solve_direct(s.mesh, s.dofs, s.wave).w;
  return s;
}

}  // namespace

TEST_CASE("zero density radiates nothing") {
  auto s = solve_disc(0.6);
  s.w.coeffs.setZero();
  CHECK(fields::eval_Hs(s.mesh, s.dofs, s.w, Vec3(0.2, 0.1, -1.0)).norm() == 0.0);
  CHECK(fields::eval_Es(s.mesh, s.dofs, s.w, Vec3(0.2, 0.1, -1.0)).norm() == 0.0);
  CHECK(fields::far_field(s.mesh, s.dofs, s.w, Vec3(0, 0, -1)).norm() == 0.0);
}

TEST_CASE("field evaluations are linear in the density") {
  auto s = solve_disc(0.55);
  const Vec3 r(0.4, -0.3, -0.8);
  const CVec3 h1 = fields::eval_Hs(s.mesh, s.dofs, s.w, r);
  auto s2 = s;
  s2.w.coeffs *= Complex(2.0, -1.0);
  const CVec3 h2 = fields::eval_Hs(s.mesh, s.dofs, s2.w, r);
  CHECK((h2 - Complex(2.0, -1.0) * h1).norm() < 1e-12 * h2.norm());
}

TEST_CASE("near-field exclusion refuses evaluations hovering over the mesh") {
  const auto s = solve_disc(0.6);
  CHECK_THROWS_AS(fields::eval_Hs(s.mesh, s.dofs, s.w, Vec3(0.1, 0.0, 1e-4)),
                  std::domain_error);
}

TEST_CASE("far field directions must be unit and downward") {
  const auto s = solve_disc(0.6);
  CHECK_THROWS_AS(fields::far_field(s.mesh, s.dofs, s.w, Vec3(0, 0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(fields::far_field(s.mesh, s.dofs, s.w, Vec3(0, 0, -2)),
                  std::invalid_argument);
}

TEST_CASE("far field is transverse and matches the near evaluation") {
  const auto s = solve_disc(0.42);
  const std::vector<Vec3> dirs = {Vec3(0.3, 0.45, -0.84).normalized(),
                                  Vec3(-0.5, 0.1, -0.86).normalized(),
                                  Vec3(0, 0, -1)};
  for (const Vec3& d : dirs) {
    const CVec3 f = fields::far_field(s.mesh, s.dofs, s.w, d);
    CHECK(std::abs(f.dot(d.cast<Complex>())) / f.norm() < 1e-3);
    double prev = 1e300;
    for (double kr : {50.0, 100.0, 200.0}) {
      const double r = kr / s.wave.k;
      const CVec3 h = fields::eval_Hs(s.mesh, s.dofs, s.w, r * d);
      const double mismatch =
          (r * std::exp(-kI * s.wave.k * r) * h - f).norm() / f.norm();
      CHECK(mismatch < prev * 1.05);
      prev = mismatch;
    }
    CHECK(prev < 0.05);
  }
}

TEST_CASE("maxwell residual of the reconstructed fields is small") {
  const auto s = solve_disc(0.5);
  const Vec3 r(0.3, 0.2, -0.7);
  const double h = 1e-4;
  CVec3 curl_h = CVec3::Zero();
  {
    std::array<CVec3, 3> dp, dm;
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      dp[a] = fields::eval_Hs(s.mesh, s.dofs, s.w, r + e);
      dm[a] = fields::eval_Hs(s.mesh, s.dofs, s.w, r - e);
    }
    auto d = [&](int a, int c) { return (dp[a][c] - dm[a][c]) / (2 * h); };
    curl_h = CVec3(d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0));
  }
  const CVec3 es = fields::eval_Es(s.mesh, s.dofs, s.w, r);
  const CVec3 hs = fields::eval_Hs(s.mesh, s.dofs, s.w, r);
  CHECK((curl_h + kI * s.wave.k * es).norm() / (s.wave.k * hs.norm()) < 1e-5);
}

TEST_CASE("aperture trace of the electric field approaches the density") {
  const auto s = solve_disc(0.35);
  const Vec2 x(0.25, -0.15);
  const CVec2 w_here = fields::density_value(s.mesh, s.dofs, s.w, x);
  REQUIRE(w_here.norm() > 0.0);
  double prev = 1e300;
  for (double z : {0.6, 0.4, 0.25}) {
    const CVec3 e = fields::eval_Es(s.mesh, s.dofs, s.w, Vec3(x.x(), x.y(), -z));
    const CVec2 trace(-e.y(), e.x());  // e3 x E
    const double dev = (trace - w_here).norm() / w_here.norm();
    CHECK(dev < prev * 1.1);
    prev = dev;
  }
}

TEST_CASE("tangential H on the plane: upper and lower limits oppose") {
  const auto s = solve_disc(0.5);
  const Vec2 x(0.2, 0.3);
  const CVec2 below = fields::tangential_Hs_plane(s.mesh, s.dofs, s.w, x, true);
  const CVec2 above = fields::tangential_Hs_plane(s.mesh, s.dofs, s.w, x, false);
  CHECK((below + above).norm() < 1e-14 * below.norm());
}

TEST_CASE("on-plane tangential H agrees with the off-plane limit") {
  const auto s = solve_disc(0.4);
  const Vec2 x(0.2, -0.3);
  const CVec2 on_plane = fields::tangential_Hs_plane(s.mesh, s.dofs, s.w, x, true);
  double prev = 1e300;
  for (double z : {0.8, 0.5, 0.3}) {
    const CVec3 h = fields::eval_Hs(s.mesh, s.dofs, s.w, Vec3(x.x(), x.y(), -z));
    const double dev = (CVec2(h.x(), h.y()) - on_plane).norm() / on_plane.norm();
    CHECK(dev < prev * 1.1);
    prev = dev;
  }
}

TEST_CASE("transmission report") {
  const auto s = solve_disc(0.35, 1.0);
  const auto grid = spectra::build_spectral_grid(1.0, 30.0, 200, 64);
  const auto rep = fields::transmission(s.mesh, s.dofs, s.w, s.wave, grid, 16, 32);
  CHECK(rep.incident_flux == doctest::Approx(0.5 * s.mesh.total_area()));
  CHECK(rep.transmitted_aperture > 0.0);
  CHECK(rep.transmitted_far > 0.0);
  CHECK(rep.tau > 0.0);
  CHECK(rep.flux_disagreement < 0.05);

  SUBCASE("zero density is rejected") {
    auto z = s.w;
    z.coeffs.setZero();
    CHECK_THROWS_AS(fields::transmission(s.mesh, s.dofs, z, s.wave, grid),
                    std::invalid_argument);
  }
}

TEST_CASE("residual suite populates every metric") {
  const auto s = solve_disc(0.5);
  const auto rep = fields::residual_suite(s.mesh, s.dofs, s.w, s.wave);
  for (const char* key :
       {"screen_tangential_E", "screen_normal_H", "aperture_Ht_continuity",
        "maxwell_fd_residual", "silver_muller_kr50", "silver_muller_kr100"}) {
    REQUIRE(rep.metrics.count(key) == 1);
    CHECK(std::isfinite(rep.metrics.at(key)));
  }
  CHECK(rep.metrics.at("silver_muller_kr100") < rep.metrics.at("silver_muller_kr50"));
}

TEST_CASE("scalar residual suite") {
  geo::ApertureSpec spec;
  spec.shape = geo::Disc{1.0};
  const auto mesh = geo::build_mesh(spec, 0.35);
  scalar_bie::ScalarWave wave;
  wave.k = 1.0;
  wave.m = Vec3(0, 0, -1);
  const auto sol = scalar_bie::solve_scalar(mesh, wave);
  const auto rep = fields::scalar_residual_suite(mesh, sol.density, wave);
  CHECK(rep.metrics.at("helmholtz_fd_residual") < 1e-4);
  CHECK(rep.metrics.at("screen_neumann") < 1e-9);
  CHECK(rep.metrics.at("sommerfeld_kr100") < rep.metrics.at("sommerfeld_kr50"));
  CHECK(std::isfinite(rep.metrics.at("aperture_continuity")));
}
