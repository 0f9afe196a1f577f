#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "aperture/geometry.hpp"

using namespace aperture;
namespace geo = aperture::geo;

namespace {

geo::ApertureSpec disc(double r) {
  geo::ApertureSpec s;
  s.shape = geo::Disc{r};
  return s;
}

}  // namespace

TEST_CASE("disc mesh area within 2% of pi at h = 0.2") {
  const auto mesh = geo::build_mesh(disc(1.0), 0.2);
  CHECK(std::abs(mesh.total_area() - kPi) / kPi < 0.02);
  CHECK(mesh.h <= 0.2 * 1.0001);
}

TEST_CASE("rectangle mesh area is exact") {
  geo::ApertureSpec s;
  s.shape = geo::Rectangle{1.0, 0.5};
  const auto mesh = geo::build_mesh(s, 0.25);
  CHECK(mesh.total_area() == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("degenerate specs are rejected") {
  geo::ApertureSpec bad;
  bad.shape = geo::Polygon{{Vec2(0, 0), Vec2(1, 0), Vec2(1, 0), Vec2(0, 1)}};
  CHECK_THROWS_AS(geo::build_mesh(bad, 0.1), std::invalid_argument);

  geo::ApertureSpec self_x;
  self_x.shape = geo::Polygon{{Vec2(0, 0), Vec2(1, 1), Vec2(1, 0), Vec2(0, 1)}};
  CHECK_THROWS_AS(geo::build_mesh(self_x, 0.1), std::invalid_argument);

  CHECK_THROWS_AS(geo::build_mesh(disc(-1.0), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(geo::build_mesh(disc(1.0), 5.0), std::invalid_argument);
  CHECK_THROWS_AS(geo::build_mesh(disc(1.0), 0.0), std::invalid_argument);
}

TEST_CASE("dof counts for tiny meshes") {
  geo::ApertureMesh one;
  one.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  one.cells = {{0, 1, 2}};
  one.finalize();
  CHECK(geo::build_dofs(one).n_vector == 0);

  geo::ApertureMesh two;
  two.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
  two.cells = {{0, 1, 2}, {0, 2, 3}};
  two.finalize();
  const auto dofs = geo::build_dofs(two);
  CHECK(dofs.n_vector == 1);
  CHECK(dofs.n_scalar == 2);
}

TEST_CASE("vector dof count matches a brute-force incidence scan") {
  const auto mesh = geo::build_mesh(disc(1.0), 0.25);
  std::map<std::pair<int, int>, int> count;
  for (const auto& c : mesh.cells)
    for (int i = 0; i < 3; ++i) {
      auto key = std::minmax(c[i], c[(i + 1) % 3]);
      count[key] += 1;
    }
  int interior = 0;
  for (const auto& [k, v] : count) interior += (v == 2);
  CHECK(geo::build_dofs(mesh).n_vector == interior);
}

TEST_CASE("disc area converges at second order") {
  double prev_err = 0.0;
  int level = 0;
  for (double h : {0.4, 0.2, 0.1}) {
    const double err = std::abs(geo::build_mesh(disc(1.0), h).total_area() - kPi);
    if (level > 0) {
      const double rate = std::log2(prev_err / err);
      CHECK(rate >= 1.9);
    }
    prev_err = err;
    ++level;
  }
}

TEST_CASE("discrete divergence equals the incidence product exactly") {
  const auto mesh = geo::build_mesh(disc(1.0), 0.35);
  const auto dofs = geo::build_dofs(mesh);
  // Integer fluxes; per cell, area*div = sum of signed fluxes of its edges.
  std::vector<int> flux(dofs.n_vector);
  for (int i = 0; i < dofs.n_vector; ++i) flux[i] = (7 * i + 3) % 11 - 5;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    long long by_cell = 0, by_incidence = 0;
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edges[c][i];
      const int dof = dofs.edge_dof[e];
      if (dof < 0) continue;
      by_cell += static_cast<long long>(mesh.cell_edge_sign[c][i]) * flux[dof];
    }
    for (int e = 0; e < mesh.n_edges(); ++e) {
      const int dof = dofs.edge_dof[e];
      if (dof < 0) continue;
      for (int i = 0; i < 3; ++i)
        if (mesh.cell_edges[c][i] == e)
          by_incidence += static_cast<long long>(mesh.cell_edge_sign[c][i]) * flux[dof];
    }
    CHECK(by_cell == by_incidence);
  }
}

TEST_CASE("interior edges carry opposite relative signs") {
  const auto mesh = geo::build_mesh(disc(1.0), 0.3);
  std::vector<int> sum(mesh.n_edges(), 0), seen(mesh.n_edges(), 0);
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int i = 0; i < 3; ++i) {
      sum[mesh.cell_edges[c][i]] += mesh.cell_edge_sign[c][i];
      seen[mesh.cell_edges[c][i]] += 1;
    }
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (seen[e] == 2) CHECK(sum[e] == 0);
    if (seen[e] == 1) CHECK(mesh.edge_cells[e] == 1);
  }
}

TEST_CASE("graded disc mesh reaches the requested rim resolution") {
  geo::MeshOptions opt;
  opt.grading_levels = 8;
  opt.grading_ratio = 0.7;
  opt.min_angle_deg = 1e-4;
  const auto mesh = geo::build_mesh(disc(1.0), 0.2, opt);
  // Smallest radial width at the rim ~ h * ratio^levels.
  double rim = 1e300;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Vec2 a = mesh.vertices[mesh.edges[e][0]];
    const Vec2 b = mesh.vertices[mesh.edges[e][1]];
    const double ra = a.norm(), rb = b.norm();
    if (std::abs(ra - rb) > 1e-12 && std::max(ra, rb) > 1.0 - 1e-9)
      rim = std::min(rim, std::abs(ra - rb));
  }
  CHECK(rim < 0.2 * std::pow(0.7, 7));
  CHECK(mesh.total_area() < kPi);
  CHECK(std::abs(mesh.total_area() - kPi) / kPi < 0.02);
}

TEST_CASE("mesh json round trip") {
  const auto mesh = geo::build_mesh(disc(0.8), 0.3);
  const auto back = geo::mesh_from_json(geo::mesh_to_json(mesh));
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_cells() == mesh.n_cells());
  CHECK(back.total_area() == doctest::Approx(mesh.total_area()).epsilon(1e-14));
  CHECK(back.n_edges() == mesh.n_edges());
}

TEST_CASE("polygon mesher honors h") {
  geo::ApertureSpec s;
  s.shape = geo::Polygon{{Vec2(0, 0), Vec2(2, 0), Vec2(2, 1), Vec2(0.5, 1.5)}};
  const auto mesh = geo::build_mesh(s, 0.3);
  CHECK(mesh.h <= 0.3);
  CHECK(mesh.total_area() == doctest::Approx(s.analytic_area()).epsilon(1e-12));
}
