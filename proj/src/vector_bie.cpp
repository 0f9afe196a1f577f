#include "aperture/vector_bie.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "aperture/threading.hpp"

namespace aperture::vector_bie {

WaveContext WaveContext::make(double k, const Vec3& m, const Vec3& p) {
  WaveContext w;
  w.k = k;
  w.m = m;
  w.p = p;
  w.q = m.cross(p);
  w.validate();
  return w;
}

void WaveContext::validate() const {
  if (!(k > 0)) throw std::invalid_argument("wave: k must be positive");
  if (std::abs(m.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("wave: m must be a unit vector");
  if (!(m.z() < 0))
    throw std::invalid_argument("wave: incidence must come from above (m3 < 0)");
  if (std::abs(p.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("wave: p must be a unit vector");
  if (std::abs(p.dot(m)) > 1e-12)
    throw std::invalid_argument("wave: polarization must satisfy p.m = 0");
  if ((q - m.cross(p)).norm() > 1e-12 || (p - q.cross(m)).norm() > 1e-12)
    throw std::invalid_argument("wave: q must equal m x p (and p = q x m)");
}

namespace {

struct DofGeom {
  double coef;  // sign * L / (2A)
  double div;   // sign * L / A
  Vec2 opp;     // vertex opposite the dof edge in this cell
};

// Per-cell data of the (up to 3) edge dofs supported on it.
struct CellDofs {
  int dof[3];
  DofGeom geom[3];
  int count = 0;
};

std::vector<CellDofs> collect_cell_dofs(const geo::ApertureMesh& mesh,
                                        const geo::DofTable& dofs) {
  std::vector<CellDofs> out(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double area = mesh.cell_area(c);
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edges[c][i];
      const int dof = dofs.edge_dof[e];
      if (dof < 0) continue;
      const double len = mesh.edge_length(e);
      const double sign = mesh.cell_edge_sign[c][i];
      CellDofs& cd = out[c];
      cd.dof[cd.count] = dof;
      cd.geom[cd.count] = {sign * len / (2.0 * area), sign * len / area,
                           mesh.vertex_of(c, i)};
      ++cd.count;
    }
  }
  return out;
}

// Projection of a tangential plane-wave field F(x) = amp * e^{ik m_t.x}
// onto the edge basis.
CVecX project_tangential(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                         const CVec2& amp, double k, const Vec2& mt, int order) {
  const auto cell_dofs = collect_cell_dofs(mesh, dofs);
  CVecX out = CVecX::Zero(dofs.n_vector);
  const auto& rule = quad::cell_quadrature(order);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto pts = quad::map_rule(rule, mesh.vertex_of(c, 0), mesh.vertex_of(c, 1),
                                    mesh.vertex_of(c, 2));
    const CellDofs& cd = cell_dofs[c];
    for (int a = 0; a < cd.count; ++a) {
      Complex acc = 0.0;
      for (const auto& p : pts) {
        const Complex phase = std::exp(kI * k * mt.dot(p.x));
        const CVec2 basis = cd.geom[a].coef * (p.x - cd.geom[a].opp).cast<Complex>();
        acc += p.w * phase * (amp.x() * basis.x() + amp.y() * basis.y());
      }
      out[cd.dof[a]] += acc;
    }
  }
  return out;
}

}  // namespace

CVecX rhs_Y(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
            const WaveContext& wave, int order) {
  wave.validate();
  // H^i + H^r on the plane has tangential part 2(q1, q2) and zero normal
  // part; Y = -e3 x (.) = (2 q2, -2 q1).
  const CVec2 amp(Complex(2.0 * wave.q.y()), Complex(-2.0 * wave.q.x()));
  return project_tangential(mesh, dofs, amp, wave.k, Vec2(wave.m.x(), wave.m.y()),
                            order);
}

CVecX physical_load(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                    const WaveContext& wave, int order) {
  wave.validate();
  const Complex s = kI * wave.k / 4.0;
  const CVec2 amp(s * 2.0 * wave.q.x(), s * 2.0 * wave.q.y());
  return project_tangential(mesh, dofs, amp, wave.k, Vec2(wave.m.x(), wave.m.y()),
                            order);
}

CMatX assemble_L_spatial(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                         double k, const singular::PairOptions& opt, int threads) {
  const int n = dofs.n_vector;
  const auto cell_dofs = collect_cell_dofs(mesh, dofs);
  const int nc = mesh.n_cells();
  const std::size_t n_pairs = static_cast<std::size_t>(nc) * (nc + 1) / 2;

  const int nt = std::max(1, threads);
  std::vector<CMatX> partials(nt, CMatX::Zero(n, n));

  auto scatter = [&](CMatX& b, const singular::PairMoments& m, int kc, int lc) {
    // test dofs on cell kc (variable x), trial dofs on cell lc (variable y)
    const CellDofs& ck = cell_dofs[kc];
    const CellDofs& cl = cell_dofs[lc];
    for (int a = 0; a < ck.count; ++a) {
      for (int bb = 0; bb < cl.count; ++bb) {
        const DofGeom& gi = ck.geom[a];
        const DofGeom& gj = cl.geom[bb];
        Complex dot = 0.0;
        for (int d = 0; d < 2; ++d)
          dot += m.q(d, d) - gj.opp[d] * m.mx[d] - gi.opp[d] * m.my[d] +
                 gi.opp[d] * gj.opp[d] * m.s;
        const Complex val = -k * k * gi.coef * gj.coef * dot + gi.div * gj.div * m.s;
        b(ck.dof[a], cl.dof[bb]) += val;
      }
    }
  };

  parallel_for(
      static_cast<std::size_t>(nt),
      [&](std::size_t t) {
        for (std::size_t idx = t; idx < n_pairs; idx += nt) {
          // Unrank the lower-triangular pair index (row >= col).
          int row = static_cast<int>((std::sqrt(8.0 * idx + 1.0) - 1.0) / 2.0);
          while (static_cast<std::size_t>(row) * (row + 1) / 2 > idx) --row;
          while (static_cast<std::size_t>(row + 1) * (row + 2) / 2 <= idx) ++row;
          const int lc = static_cast<int>(idx - static_cast<std::size_t>(row) * (row + 1) / 2);
          const auto m = singular::integrate_pair(mesh, row, lc, k, opt);
          scatter(partials[t], m, row, lc);
          if (row != lc) scatter(partials[t], m.mirrored(), lc, row);
        }
      },
      nt);

  CMatX b = CMatX::Zero(n, n);
  for (auto& p : partials) b += p;
  return b;
}

CMatX assemble_B_spectral(const basis::MeshTransforms& mt,
                          const spectra::SpectralGrid& grid, double k,
                          int threads) {
  return basis::accumulate_vector_form(
      mt, grid,
      [k](const Vec2& xi, Complex g0, Complex& d1, Complex& d2) {
        d1 = g0 * (xi.squaredNorm() - k * k);
        d2 = -g0 * (k * k);
      },
      threads);
}

Eigen::MatrixXd curl_incidence(const geo::ApertureMesh& mesh,
                               const geo::DofTable& dofs) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dofs.n_vector, dofs.n_multiplier);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const int dof = dofs.edge_dof[e];
    if (dof < 0) continue;
    const int tail = mesh.edges[e][0], head = mesh.edges[e][1];
    if (dofs.vertex_dof[head] >= 0) c(dof, dofs.vertex_dof[head]) += 1.0;
    if (dofs.vertex_dof[tail] >= 0) c(dof, dofs.vertex_dof[tail]) -= 1.0;
  }
  return c;
}

CMatX assemble_E(const CMatX& b, const Eigen::MatrixXd& c) {
  return b * c.cast<Complex>();
}

VectorSolution solve_direct_system(const CMatX& b, const CVecX& load, double k) {
  Eigen::PartialPivLU<CMatX> lu(b);
  const CVecX w = lu.solve(load);
  VectorSolution sol;
  sol.w.k = k;
  sol.w.coeffs = w;
  sol.report.unknowns = static_cast<int>(b.rows());
  sol.report.residual = (b * w - load).norm() / std::max(load.norm(), 1e-300);
  const auto est = estimate_condition(b, lu);
  sol.report.condition = est.condition;
  sol.report.smallest_singular = est.smallest_singular;
  if (!std::isfinite(est.condition) || est.smallest_singular <= 0.0)
    throw std::runtime_error("solve_direct: ill-conditioned system");
  return sol;
}

VectorSolution solve_direct(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                            const WaveContext& wave,
                            const singular::PairOptions& opt, int threads) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const CMatX b = assemble_L_spatial(mesh, dofs, wave.k, opt, threads);
  const auto t1 = clock::now();
  const CVecX load = physical_load(mesh, dofs, wave);
  auto sol = solve_direct_system(b, load, wave.k);
  const auto t2 = clock::now();
  sol.report.assembly_seconds = std::chrono::duration<double>(t1 - t0).count();
  sol.report.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
  return sol;
}

SaddleSolution solve_saddle_system(const CMatX& b, const Eigen::MatrixXd& c,
                                   const CVecX& load, double k) {
  const int n = static_cast<int>(b.rows());
  const int m = static_cast<int>(c.cols());
  if (m == 0)
    throw std::runtime_error("solve_saddle: empty multiplier space");
  const CMatX e = assemble_E(b, c);
  {
    // The constraint block must have full column rank.
    Eigen::ColPivHouseholderQR<CMatX> qr(e);
    if (qr.rank() < m)
      throw std::runtime_error("solve_saddle: rank-deficient constraint block");
  }
  CMatX sys = CMatX::Zero(n + m, n + m);
  sys.topLeftCorner(n, n) = b;
  sys.topRightCorner(n, m) = e;
  sys.bottomLeftCorner(m, n) = e.adjoint();
  CVecX rhs = CVecX::Zero(n + m);
  rhs.head(n) = load;

  Eigen::PartialPivLU<CMatX> lu(sys);
  const CVecX xy = lu.solve(rhs);

  SaddleSolution sol;
  sol.state.u.k = k;
  sol.state.u.coeffs = xy.head(n);
  sol.state.p_mult = xy.tail(m);
  sol.report.unknowns = n + m;
  sol.report.residual = (sys * xy - rhs).norm() / std::max(rhs.norm(), 1e-300);
  const double constraint = (e.adjoint() * xy.head(n)).norm();
  sol.report.metrics["constraint_residual"] =
      constraint / std::max(1e-300, e.norm() * xy.head(n).norm());
  const auto est = estimate_condition(sys, lu);
  sol.report.condition = est.condition;
  sol.report.smallest_singular = est.smallest_singular;
  if (!std::isfinite(est.condition) || est.smallest_singular <= 0.0)
    throw std::runtime_error("solve_saddle: singular saddle system");
  return sol;
}

SaddleSolution solve_saddle(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                            const WaveContext& wave,
                            const singular::PairOptions& opt, int threads) {
  const CMatX b = assemble_L_spatial(mesh, dofs, wave.k, opt, threads);
  const Eigen::MatrixXd c = curl_incidence(mesh, dofs);
  const CVecX load = physical_load(mesh, dofs, wave);
  return solve_saddle_system(b, c, load, wave.k);
}

CoercivityReport coercivity_probe(const geo::ApertureMesh& mesh,
                                  const geo::DofTable& dofs, double k,
                                  int n_samples, unsigned seed,
                                  const spectra::SpectralGrid& grid,
                                  const CMatX& b_spatial) {
  basis::MeshTransforms mt(mesh, dofs);
  const auto table = basis::build_vector_table(mt, grid);

  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CoercivityReport rep;
  rep.samples = n_samples;

  // Garding pair over random densities: c chosen as the smallest multiple of
  // the worst negative Re(u^H B u)/||u||_H^2 that clears zero, then alpha is
  // the resulting envelope constant.
  std::vector<double> re_b(n_samples), x2(n_samples), h2(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    CVecX u(dofs.n_vector);
    for (int i = 0; i < dofs.n_vector; ++i) u[i] = Complex(gauss(rng), gauss(rng));
    const auto norms = basis::rt0_norms(table, grid, u);
    re_b[s] = (u.adjoint() * (b_spatial * u))(0).real();
    x2[s] = norms.x * norms.x;
    h2[s] = norms.h * norms.h;
  }
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) worst = std::max(worst, -re_b[s] / h2[s]);
  rep.c = 1.5 * worst;
  double alpha = 1e300;
  for (int s = 0; s < n_samples; ++s)
    alpha = std::min(alpha, (re_b[s] + rep.c * h2[s]) / x2[s]);
  rep.alpha = alpha;

  // Inf-sup style quotient for E: max_u Re E(q,u)/||u||_X is the dual norm
  // of the column (B C) e_q under the X Gram.
  const Eigen::MatrixXd c_inc = curl_incidence(mesh, dofs);
  const CMatX e = b_spatial * c_inc.cast<Complex>();
  CMatX gx = CMatX::Zero(dofs.n_vector, dofs.n_vector);
  {
    CVecX d1(grid.n_nodes()), d2(grid.n_nodes());
    for (std::size_t q = 0; q < grid.n_nodes(); ++q) {
      const double r2 = grid.node(q).squaredNorm();
      const double base = grid.weight(q) / (4.0 * kPi * kPi);
      d1[q] = base * std::sqrt(1.0 + r2);
      d2[q] = base / std::sqrt(1.0 + r2);
    }
    gx.noalias() = table.a1.adjoint() * (d1.asDiagonal() * table.a1);
    gx.noalias() += table.a2.adjoint() * (d2.asDiagonal() * table.a2);
  }
  const Eigen::LLT<CMatX> llt((gx + gx.adjoint()) / 2.0);

  const CMatX mult_table = basis::build_multiplier_table(mt, grid);
  double beta = 1e300;
  for (int s = 0; s < (dofs.n_multiplier > 0 ? n_samples : 0); ++s) {
    CVecX q = CVecX::Zero(dofs.n_multiplier);
    for (int i = 0; i < dofs.n_multiplier; ++i) q[i] = Complex(gauss(rng), gauss(rng));
    const CVecX col = e * q;
    const double dual = llt.matrixL().solve(col).norm();
    const CVecX qhat = mult_table * q;
    double np = 0.0, nm = 0.0;
    for (std::size_t t = 0; t < grid.n_nodes(); ++t) {
      const double r2 = grid.node(t).squaredNorm();
      np += grid.weight(t) * std::sqrt(1.0 + r2) * std::norm(qhat[t]);
      nm += grid.weight(t) / std::sqrt(1.0 + r2) * std::norm(qhat[t]);
    }
    np = std::sqrt(np / (4.0 * kPi * kPi));
    nm = std::sqrt(nm / (4.0 * kPi * kPi));
    if (np - nm > 1e-12 * np) beta = std::min(beta, dual / (np - nm));
  }
  rep.beta = (beta == 1e300) ? 0.0 : beta;

  // Low-frequency bound on P0 densities.
  const CMatX s_table = basis::build_scalar_table(mt, grid);
  double linf = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    CVecX psi(mesh.n_cells());
    for (int i = 0; i < mesh.n_cells(); ++i) psi[i] = Complex(gauss(rng), gauss(rng));
    const double nrm = basis::p0_sobolev_norm(s_table, grid, psi, -0.5);
    const CVecX fhat = s_table * psi;
    double fmax = 0.0;
    for (std::size_t t = 0; t < grid.n_nodes(); ++t)
      if (grid.node(t).norm() <= 2.0 * k) fmax = std::max(fmax, std::abs(fhat[t]));
    linf = std::max(linf, fmax / nrm);
  }
  rep.linfty_constant = linf;
  return rep;
}

}  // namespace aperture::vector_bie
