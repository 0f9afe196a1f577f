#include "aperture/scalar_bie.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "aperture/greens.hpp"
#include "aperture/threading.hpp"

namespace aperture::scalar_bie {

void ScalarWave::validate() const {
  if (k < 0) throw std::invalid_argument("scalar wave: k must be >= 0");
  if (std::abs(m.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("scalar wave: m must be a unit vector");
  if (k > 0 && !(m.z() < 0))
    throw std::invalid_argument("scalar wave: incidence must come from above (m3 < 0)");
}

IncidentScalar incident_scalar(const ScalarWave& wave, const Vec3& r) {
  IncidentScalar out;
  out.ui = std::exp(kI * wave.k * wave.m.dot(r));
  const Vec3 mr(wave.m.x(), wave.m.y(), -wave.m.z());
  out.ur = std::exp(kI * wave.k * mr.dot(r));
  return out;
}

CMatX assemble_T_spatial(const geo::ApertureMesh& mesh, double k,
                         const singular::PairOptions& opt, int threads) {
  const int n = mesh.n_cells();
  CMatX t(n, n);
  // Entry (i,j) with j <= i is one pair integral; (j,i) reuses it, so the
  // matrix is symmetric to rounding. Each entry has a unique writer.
  parallel_for(
      static_cast<std::size_t>(n),
      [&](std::size_t i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const Complex v =
              singular::integrate_pair(mesh, static_cast<int>(i),
                                       static_cast<int>(j), k, opt)
                  .s;
          t(i, j) = v;
          t(j, i) = v;
        }
      },
      threads);
  return t;
}

CMatX assemble_T_spectral(const basis::MeshTransforms& mt,
                          const spectra::SpectralGrid& grid, int threads) {
  return basis::accumulate_scalar_form(
      mt, grid, [](const Vec2&, Complex g0) { return g0; }, threads);
}

CVecX scalar_rhs(const geo::ApertureMesh& mesh, const ScalarWave& wave, int order) {
  CVecX rhs(mesh.n_cells());
  const auto& rule = quad::cell_quadrature(order);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Complex acc = 0.0;
    for (const auto& p :
         quad::map_rule(rule, mesh.vertex_of(c, 0), mesh.vertex_of(c, 1),
                        mesh.vertex_of(c, 2)))
      acc += p.w * std::exp(kI * wave.k * (wave.m.x() * p.x.x() + wave.m.y() * p.x.y()));
    rhs[c] = acc;
  }
  return rhs;
}

ScalarSolution solve_scalar(const geo::ApertureMesh& mesh, const ScalarWave& wave,
                            const singular::PairOptions& opt, int threads) {
  wave.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const CMatX t = assemble_T_spatial(mesh, wave.k, opt, threads);
  const auto t1 = clock::now();
  const CVecX rhs = scalar_rhs(mesh, wave);

  Eigen::PartialPivLU<CMatX> lu(t);
  const CVecX psi = lu.solve(rhs);
  const auto t2 = clock::now();

  ScalarSolution sol;
  sol.density.k = wave.k;
  sol.density.coeffs = psi;
  sol.report.unknowns = mesh.n_cells();
  sol.report.residual = (t * psi - rhs).norm() / std::max(rhs.norm(), 1e-300);
  const auto est = estimate_condition(t, lu);
  sol.report.condition = est.condition;
  sol.report.smallest_singular = est.smallest_singular;
  sol.report.assembly_seconds = std::chrono::duration<double>(t1 - t0).count();
  sol.report.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  if (!std::isfinite(est.condition) || est.smallest_singular <= 0.0)
    throw std::runtime_error("solve_scalar: singular Galerkin system");
  return sol;
}

Complex eval_us_scalar(const geo::ApertureMesh& mesh, const ScalarDensity& density,
                       const Vec3& r, const singular::InnerOptions& opt) {
  const double z = r.z();
  const Vec2 x(r.x(), r.y());
  const double k = density.k;

  if (z == 0.0) {
    // In-plane: closed-form static part keeps the trace accurate on and
    // near the aperture.
    Complex acc = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const singular::Triangle tri{mesh.vertex_of(c, 0), mesh.vertex_of(c, 1),
                                   mesh.vertex_of(c, 2)};
      acc += density.coeffs[c] * singular::inner_integral(tri, x, k, opt).i0;
    }
    return -acc;  // the upper/lower limits agree up to sign; return the upper
  }

  Complex acc = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double h_local = mesh.cell_diameter(c);
    const Vec2 cc = mesh.cell_centroid(c);
    const double horiz = (x - cc).norm() - h_local;
    if (std::abs(z) < 0.1 * h_local && horiz < 0.1 * h_local)
      throw std::domain_error("eval_us_scalar: evaluation inside the near-field exclusion");
    const double dist3 = std::sqrt(z * z + std::max(horiz, 0.0) * std::max(horiz, 0.0));
    const int order = (dist3 > 8 * h_local)   ? 2
                      : (dist3 > 4 * h_local) ? 4
                      : (dist3 > 2 * h_local) ? 6
                                              : 9;
    Complex cell_acc = 0.0;
    for (const auto& p :
         quad::map_rule(quad::cell_quadrature(order), mesh.vertex_of(c, 0),
                        mesh.vertex_of(c, 1), mesh.vertex_of(c, 2))) {
      const double R = std::sqrt((x - p.x).squaredNorm() + z * z);
      cell_acc += p.w * std::exp(kI * k * R) / (4.0 * kPi * R);
    }
    acc += density.coeffs[c] * cell_acc;
  }
  return (z > 0 ? -1.0 : 1.0) * acc;
}

Complex density_integral(const geo::ApertureMesh& mesh, const ScalarDensity& density) {
  Complex acc = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c)
    acc += density.coeffs[c] * mesh.cell_area(c);
  return acc;
}

}  // namespace aperture::scalar_bie
