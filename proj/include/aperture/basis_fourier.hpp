#pragma once

#include <functional>

#include "aperture/geometry.hpp"
#include "aperture/spectra.hpp"
#include "aperture/types.hpp"

namespace aperture::basis {

// Closed-form Fourier transforms of the mesh bases under
// fhat(xi) = int e^{-i xi.x} f(x) dx. Cell and edge integrals reduce to 1D
// sinc-type transforms along the boundary (with series limits near the
// removable points); cells with |xi| diam below ~0.6 use a high-order rule.

class MeshTransforms {
 public:
  MeshTransforms(const geo::ApertureMesh& mesh, const geo::DofTable& dofs);

  // S_K(xi) for every cell (P0 basis).
  void cell_transforms(const Vec2& xi, CVecX& s) const;

  // Helmholtz components (a1 along xi-hat, a2 along the perp) of the RT0
  // edge-basis transforms, all interior-edge dofs at once.
  void rt0_components(const Vec2& xi, CVecX& a1, CVecX& a2) const;

  // Interior-vertex P1 hat transforms (saddle multiplier basis).
  void p1_transforms(const Vec2& xi, CVecX& p) const;

  const geo::ApertureMesh& mesh() const { return *mesh_; }
  const geo::DofTable& dofs() const { return *dofs_; }

 private:
  struct EdgeGeom {
    Vec2 a, dir;
    double len;
  };
  struct CellGeom {
    double area, diam;
    Vec2 v[3];
    Vec2 p1_grad[3];  // gradient of the hat function of local vertex i
  };
  struct NodeScratch {
    std::vector<Complex> edge_e;   // int_e e^{-i xi.x} dl
    std::vector<Complex> edge_m1;  // int_e t e^{-i xi.x} dl, tail->head param
    std::vector<Complex> cell_s;
    std::vector<Complex> cell_b0;  // v-independent tangential boundary moment
    std::vector<CVec2> cell_bv;    // B2(v) = b0 - v . bv
  };
  void fill_scratch(const Vec2& xi, NodeScratch& sc) const;
  // int_K (x - v_local) e^{-i xi.x} dx projected on (xi-hat, xi-perp-hat).
  void cell_moment(const Vec2& xi, const NodeScratch& sc, int cell, int v_local,
                   Complex& t_par, Complex& t_perp) const;

  const geo::ApertureMesh* mesh_;
  const geo::DofTable* dofs_;
  std::vector<EdgeGeom> edges_;
  std::vector<CellGeom> cells_;

  friend struct TableBuilder;
};

// Diagonal weights: d1 multiplies a1_j conj(a1_i), d2 multiplies
// a2_j conj(a2_i) in the accumulated form.
using VectorWeightFn =
    std::function<void(const Vec2& xi, Complex g0, Complex& d1, Complex& d2)>;
using ScalarWeightFn = std::function<Complex(const Vec2& xi, Complex g0)>;

// M_ij = (1/4pi^2) sum_q w_q d(xi_q) fhat_j(xi_q) conj(fhat_i(xi_q));
// chunked over nodes so large meshes never hold full transform tables.
CMatX accumulate_scalar_form(const MeshTransforms& mt,
                             const spectra::SpectralGrid& grid,
                             const ScalarWeightFn& weight, int threads = 1);
CMatX accumulate_vector_form(const MeshTransforms& mt,
                             const spectra::SpectralGrid& grid,
                             const VectorWeightFn& weight, int threads = 1);
CMatX accumulate_multiplier_form(const MeshTransforms& mt,
                                 const spectra::SpectralGrid& grid,
                                 const ScalarWeightFn& weight, int threads = 1);

// Full transform tables (rows = grid nodes); intended for probe-sized meshes.
struct VectorTable {
  CMatX a1, a2;
};
VectorTable build_vector_table(const MeshTransforms& mt,
                               const spectra::SpectralGrid& grid);
CMatX build_scalar_table(const MeshTransforms& mt,
                         const spectra::SpectralGrid& grid);
CMatX build_multiplier_table(const MeshTransforms& mt,
                             const spectra::SpectralGrid& grid);

// Discrete fractional norms of mesh densities evaluated on the grid from the
// exact finite-element transforms.
double p0_sobolev_norm(const CMatX& scalar_table, const spectra::SpectralGrid& grid,
                       const CVecX& cell_coeffs, double s);

struct VectorNorms {
  double h = 0.0;    // tilde H^{-1/2} x tilde H^{-1/2} of the field
  double div = 0.0;  // tilde H^{-1/2} norm of the divergence
  double x = 0.0;    // sqrt(h^2 + div^2)
};
VectorNorms rt0_norms(const VectorTable& table, const spectra::SpectralGrid& grid,
                      const CVecX& dof_coeffs);

// Transform of a P0 density at a single xi (low-frequency probe).
Complex p0_density_transform(const MeshTransforms& mt, const CVecX& cell_coeffs,
                             const Vec2& xi);

}  // namespace aperture::basis
