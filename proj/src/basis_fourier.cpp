#include "aperture/basis_fourier.hpp"

#include <cmath>

#include "aperture/quadrature.hpp"
#include "aperture/threading.hpp"

namespace aperture::basis {

namespace {

// phi0(z) = (e^z - 1)/z, phi1(z) = (e^z (z-1) + 1)/z^2, stable near z = 0.
Complex phi0(Complex z) {
  if (std::abs(z) < 1e-2)
    return 1.0 + z * (0.5 + z * (1.0 / 6 + z * (1.0 / 24 + z / 120.0)));
  return (std::exp(z) - 1.0) / z;
}

Complex phi1(Complex z) {
  if (std::abs(z) < 1e-2)
    return 0.5 + z * (1.0 / 3 + z * (0.125 + z * (1.0 / 30 + z / 144.0)));
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace

MeshTransforms::MeshTransforms(const geo::ApertureMesh& mesh,
                               const geo::DofTable& dofs)
    : mesh_(&mesh), dofs_(&dofs) {
  edges_.resize(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    edges_[e].a = mesh.vertices[mesh.edges[e][0]];
    edges_[e].dir = mesh.vertices[mesh.edges[e][1]] - edges_[e].a;
    edges_[e].len = edges_[e].dir.norm();
  }
  cells_.resize(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    CellGeom& g = cells_[c];
    g.area = mesh.cell_area(c);
    g.diam = mesh.cell_diameter(c);
    for (int i = 0; i < 3; ++i) g.v[i] = mesh.vertex_of(c, i);
    for (int i = 0; i < 3; ++i) {
      const Vec2 opp = g.v[(i + 2) % 3] - g.v[(i + 1) % 3];
      g.p1_grad[i] = rot90(opp) / (2.0 * g.area);
    }
  }
}

void MeshTransforms::fill_scratch(const Vec2& xi, NodeScratch& sc) const {
  const geo::ApertureMesh& mesh = *mesh_;
  sc.edge_e.resize(mesh.n_edges());
  sc.edge_m1.resize(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const EdgeGeom& g = edges_[e];
    const Complex phase = std::exp(-kI * xi.dot(g.a));
    const Complex z = -kI * xi.dot(g.dir);
    sc.edge_e[e] = g.len * phase * phi0(z);
    sc.edge_m1[e] = g.len * phase * phi1(z);
  }

  const double r2 = xi.squaredNorm();
  sc.cell_s.resize(mesh.n_cells());
  sc.cell_b0.resize(mesh.n_cells());
  sc.cell_bv.resize(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellGeom& g = cells_[c];
    if (std::sqrt(r2) * g.diam <= 0.6) {
      // Near-polynomial integrand: a degree-12 rule is exact to ~1e-12 here.
      Complex s = 0.0;
      for (const auto& p : quad::map_rule(quad::cell_quadrature(12), g.v[0], g.v[1], g.v[2]))
        s += p.w * std::exp(-kI * xi.dot(p.x));
      sc.cell_s[c] = s;
    } else {
      Complex s = 0.0;
      for (int i = 0; i < 3; ++i) {
        const int e = mesh.cell_edges[c][i];
        const Vec2 ccw_dir = (g.v[(i + 2) % 3] - g.v[(i + 1) % 3]).normalized();
        const Vec2 n_out(ccw_dir.y(), -ccw_dir.x());
        s += xi.dot(n_out) * sc.edge_e[e];
      }
      sc.cell_s[c] = kI * s / r2;
    }
    // Tangential boundary moments: B2(v) = b0 - v . bv with
    // b0 = sum_e [(a_ccw . tau) E + L M1_ccw], bv = sum_e tau E.
    Complex b0 = 0.0;
    CVec2 bv = CVec2::Zero();
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edges[c][i];
      const Vec2 a_ccw = g.v[(i + 1) % 3];
      const Vec2 b_ccw = g.v[(i + 2) % 3];
      const double L = edges_[e].len;
      const Vec2 tau = (b_ccw - a_ccw) / L;
      const bool fwd = (mesh.cells[c][(i + 1) % 3] == mesh.edges[e][0]);
      const Complex m1_ccw = fwd ? sc.edge_m1[e] : (sc.edge_e[e] - sc.edge_m1[e]);
      b0 += a_ccw.dot(tau) * sc.edge_e[e] + L * m1_ccw;
      bv += tau.cast<Complex>() * sc.edge_e[e];
    }
    sc.cell_b0[c] = b0;
    sc.cell_bv[c] = bv;
  }
}

void MeshTransforms::cell_moment(const Vec2& xi, const NodeScratch& sc, int cell,
                                 int v_local, Complex& t_par, Complex& t_perp) const {
  const CellGeom& g = cells_[cell];
  const double r = xi.norm();
  const Vec2 v = g.v[v_local];
  if (r * g.diam <= 0.6) {
    CVec2 t = CVec2::Zero();
    for (const auto& p : quad::map_rule(quad::cell_quadrature(12), g.v[0], g.v[1], g.v[2]))
      t += (p.w * std::exp(-kI * xi.dot(p.x))) * (p.x - v).cast<Complex>();
    const Vec2 xh = (r > 0) ? Vec2(xi / r) : Vec2(1, 0);
    const Vec2 xp(xh.y(), -xh.x());
    t_par = t.x() * xh.x() + t.y() * xh.y();
    t_perp = t.x() * xp.x() + t.y() * xp.y();
    return;
  }
  // Boundary reduction: the flux moment picks out the edge opposite v (the
  // constant (x-v).n vanishes on the edges through v), the tangential moment
  // uses the precomputed boundary sums.
  const int e_opp = mesh_->cell_edges[cell][v_local];
  const Complex b1 = (2.0 * g.area / edges_[e_opp].len) * sc.edge_e[e_opp];
  const Complex xi_dot_t = -kI * (2.0 * sc.cell_s[cell] - b1);
  const Complex b2 = sc.cell_b0[cell] - (v.x() * sc.cell_bv[cell].x() +
                                         v.y() * sc.cell_bv[cell].y());
  const Complex xiperp_dot_t = -kI * b2;
  t_par = xi_dot_t / r;
  t_perp = xiperp_dot_t / r;
}

void MeshTransforms::cell_transforms(const Vec2& xi, CVecX& s) const {
  NodeScratch sc;
  fill_scratch(xi, sc);
  s.resize(mesh_->n_cells());
  for (int c = 0; c < mesh_->n_cells(); ++c) s[c] = sc.cell_s[c];
}

void MeshTransforms::rt0_components(const Vec2& xi, CVecX& a1, CVecX& a2) const {
  NodeScratch sc;
  fill_scratch(xi, sc);
  const geo::ApertureMesh& mesh = *mesh_;
  const geo::DofTable& dofs = *dofs_;
  a1 = CVecX::Zero(dofs.n_vector);
  a2 = CVecX::Zero(dofs.n_vector);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edges[c][i];
      const int dof = dofs.edge_dof[e];
      if (dof < 0) continue;
      const double coef =
          mesh.cell_edge_sign[c][i] * edges_[e].len / (2.0 * cells_[c].area);
      Complex tp, tq;
      cell_moment(xi, sc, c, i, tp, tq);
      a1[dof] += coef * tp;
      a2[dof] += coef * tq;
    }
  }
}

void MeshTransforms::p1_transforms(const Vec2& xi, CVecX& p) const {
  NodeScratch sc;
  fill_scratch(xi, sc);
  const geo::ApertureMesh& mesh = *mesh_;
  const geo::DofTable& dofs = *dofs_;
  const double r = xi.norm();
  const Vec2 xh = (r > 0) ? Vec2(xi / r) : Vec2(1, 0);
  const Vec2 xp(xh.y(), -xh.x());
  p = CVecX::Zero(dofs.n_multiplier);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const int dof = dofs.vertex_dof[mesh.cells[c][i]];
      if (dof < 0) continue;
      Complex tp, tq;
      cell_moment(xi, sc, c, i, tp, tq);
      // lambda(x) = 1 + grad.(x - v) on this cell, so
      // lambda_hat = S_K + grad . int (x-v) e^{-i xi.x}.
      const Vec2 g = cells_[c].p1_grad[i];
      const CVec2 t = tp * xh.cast<Complex>() + tq * xp.cast<Complex>();
      p[dof] += sc.cell_s[c] + g.x() * t.x() + g.y() * t.y();
    }
  }
}

namespace {

constexpr std::size_t kChunk = 512;

template <typename FillRow, typename Weighted>
CMatX accumulate_generic(const spectra::SpectralGrid& grid, int n, int threads,
                         const FillRow& fill_row, const Weighted& apply) {
  const std::size_t n_nodes = grid.n_nodes();
  const std::size_t n_chunks = (n_nodes + kChunk - 1) / kChunk;
  const int nt = std::max(1, threads);
  std::vector<CMatX> partials(nt, CMatX::Zero(n, n));

  parallel_for(
      static_cast<std::size_t>(nt),
      [&](std::size_t t) {
        for (std::size_t ch = t; ch < n_chunks; ch += nt) {
          const std::size_t lo = ch * kChunk;
          const std::size_t hi = std::min(n_nodes, lo + kChunk);
          apply(lo, hi, fill_row, partials[t]);
        }
      },
      nt);

  CMatX out = CMatX::Zero(n, n);
  for (auto& p : partials) out += p;
  return out;
}

}  // namespace

CMatX accumulate_scalar_form(const MeshTransforms& mt,
                             const spectra::SpectralGrid& grid,
                             const ScalarWeightFn& weight, int threads) {
  const int n = mt.mesh().n_cells();
  auto fill = [&](std::size_t q, CVecX& row) { mt.cell_transforms(grid.node(q), row); };
  auto apply = [&](std::size_t lo, std::size_t hi, auto& fill_row, CMatX& acc) {
    CMatX rows(hi - lo, n);
    CVecX d(hi - lo);
    CVecX row;
    for (std::size_t q = lo; q < hi; ++q) {
      fill_row(q, row);
      rows.row(q - lo) = row.transpose();
      d[q - lo] = grid.weight(q) / (4.0 * kPi * kPi) *
                  weight(grid.node(q), grid.symbol(q));
    }
    acc.noalias() += rows.adjoint() * (d.asDiagonal() * rows);
  };
  return accumulate_generic(grid, n, threads, fill, apply);
}

CMatX accumulate_vector_form(const MeshTransforms& mt,
                             const spectra::SpectralGrid& grid,
                             const VectorWeightFn& weight, int threads) {
  const int n = mt.dofs().n_vector;
  auto fill = [&](std::size_t q, CVecX& a1, CVecX& a2) {
    mt.rt0_components(grid.node(q), a1, a2);
  };
  auto apply = [&](std::size_t lo, std::size_t hi, auto& fill_row, CMatX& acc) {
    CMatX rows1(hi - lo, n), rows2(hi - lo, n);
    CVecX d1(hi - lo), d2(hi - lo);
    CVecX a1, a2;
    for (std::size_t q = lo; q < hi; ++q) {
      fill_row(q, a1, a2);
      rows1.row(q - lo) = a1.transpose();
      rows2.row(q - lo) = a2.transpose();
      Complex w1, w2;
      weight(grid.node(q), grid.symbol(q), w1, w2);
      const double base = grid.weight(q) / (4.0 * kPi * kPi);
      d1[q - lo] = base * w1;
      d2[q - lo] = base * w2;
    }
    acc.noalias() += rows1.adjoint() * (d1.asDiagonal() * rows1);
    acc.noalias() += rows2.adjoint() * (d2.asDiagonal() * rows2);
  };
  return accumulate_generic(grid, n, threads, fill, apply);
}

CMatX accumulate_multiplier_form(const MeshTransforms& mt,
                                 const spectra::SpectralGrid& grid,
                                 const ScalarWeightFn& weight, int threads) {
  const int n = mt.dofs().n_multiplier;
  auto fill = [&](std::size_t q, CVecX& row) { mt.p1_transforms(grid.node(q), row); };
  auto apply = [&](std::size_t lo, std::size_t hi, auto& fill_row, CMatX& acc) {
    CMatX rows(hi - lo, n);
    CVecX d(hi - lo);
    CVecX row;
    for (std::size_t q = lo; q < hi; ++q) {
      fill_row(q, row);
      rows.row(q - lo) = row.transpose();
      d[q - lo] = grid.weight(q) / (4.0 * kPi * kPi) *
                  weight(grid.node(q), grid.symbol(q));
    }
    acc.noalias() += rows.adjoint() * (d.asDiagonal() * rows);
  };
  return accumulate_generic(grid, n, threads, fill, apply);
}

VectorTable build_vector_table(const MeshTransforms& mt,
                               const spectra::SpectralGrid& grid) {
  VectorTable table;
  const std::size_t m = grid.n_nodes();
  table.a1.resize(m, mt.dofs().n_vector);
  table.a2.resize(m, mt.dofs().n_vector);
  CVecX a1, a2;
  for (std::size_t q = 0; q < m; ++q) {
    mt.rt0_components(grid.node(q), a1, a2);
    table.a1.row(q) = a1.transpose();
    table.a2.row(q) = a2.transpose();
  }
  return table;
}

CMatX build_scalar_table(const MeshTransforms& mt, const spectra::SpectralGrid& grid) {
  const std::size_t m = grid.n_nodes();
  CMatX table(m, mt.mesh().n_cells());
  CVecX row;
  for (std::size_t q = 0; q < m; ++q) {
    mt.cell_transforms(grid.node(q), row);
    table.row(q) = row.transpose();
  }
  return table;
}

CMatX build_multiplier_table(const MeshTransforms& mt,
                             const spectra::SpectralGrid& grid) {
  const std::size_t m = grid.n_nodes();
  CMatX table(m, mt.dofs().n_multiplier);
  CVecX row;
  for (std::size_t q = 0; q < m; ++q) {
    mt.p1_transforms(grid.node(q), row);
    table.row(q) = row.transpose();
  }
  return table;
}

double p0_sobolev_norm(const CMatX& scalar_table, const spectra::SpectralGrid& grid,
                       const CVecX& cell_coeffs, double s) {
  const CVecX fhat = scalar_table * cell_coeffs;
  double acc = 0.0;
  for (std::size_t q = 0; q < grid.n_nodes(); ++q) {
    const double w = std::pow(1.0 + grid.node(q).squaredNorm(), s);
    acc += grid.weight(q) * w * std::norm(fhat[q]);
  }
  return std::sqrt(acc / (4.0 * kPi * kPi));
}

VectorNorms rt0_norms(const VectorTable& table, const spectra::SpectralGrid& grid,
                      const CVecX& dof_coeffs) {
  const CVecX a1 = table.a1 * dof_coeffs;
  const CVecX a2 = table.a2 * dof_coeffs;
  double h = 0.0, dv = 0.0;
  for (std::size_t q = 0; q < grid.n_nodes(); ++q) {
    const double r2 = grid.node(q).squaredNorm();
    const double w = grid.weight(q) / std::sqrt(1.0 + r2);
    h += w * (std::norm(a1[q]) + std::norm(a2[q]));
    dv += w * r2 * std::norm(a1[q]);  // div-hat = i |xi| a1
  }
  VectorNorms out;
  out.h = std::sqrt(h / (4.0 * kPi * kPi));
  out.div = std::sqrt(dv / (4.0 * kPi * kPi));
  out.x = std::sqrt(out.h * out.h + out.div * out.div);
  return out;
}

Complex p0_density_transform(const MeshTransforms& mt, const CVecX& cell_coeffs,
                             const Vec2& xi) {
  CVecX s;
  mt.cell_transforms(xi, s);
  return s.transpose() * cell_coeffs;
}

}  // namespace aperture::basis
