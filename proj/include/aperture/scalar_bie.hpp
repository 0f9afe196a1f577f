#pragma once

#include "aperture/basis_fourier.hpp"
#include "aperture/geometry.hpp"
#include "aperture/report.hpp"
#include "aperture/singular.hpp"
#include "aperture/spectra.hpp"
#include "aperture/types.hpp"

namespace aperture::scalar_bie {

struct ScalarWave {
  double k = 1.0;   // k = 0 is the static problem (u^i = 1)
  Vec3 m{0, 0, -1};  // unit propagation direction, incoming from above

  void validate() const;
};

// u^i = e^{ik m.r} and the mirror reflection u^r = e^{ik m'.r},
// m' = (m1, m2, -m3).
struct IncidentScalar {
  Complex ui, ur;
};
IncidentScalar incident_scalar(const ScalarWave& wave, const Vec3& r);

// Galerkin matrix of T[p](x) = int_Gamma g0(x,y) p(y) dy on piecewise
// constants: T_ij = int_i int_j g0. Symmetric (non-conjugate) by
// construction: the (j,i) entry reuses the (i,j) pair integral mirrored.
CMatX assemble_T_spatial(const geo::ApertureMesh& mesh, double k,
                         const singular::PairOptions& opt = {}, int threads = 1);

// Same matrix from the Fourier side:
// T_ij = (1/4pi^2) sum_q w_q ghat0 Shat_j conj(Shat_i).
CMatX assemble_T_spectral(const basis::MeshTransforms& mt,
                          const spectra::SpectralGrid& grid, int threads = 1);

struct ScalarDensity {
  double k = 0.0;
  CVecX coeffs;  // one per cell
};

// Load vector <u^i, phi_i> = int_cell u^i.
CVecX scalar_rhs(const geo::ApertureMesh& mesh, const ScalarWave& wave,
                 int order = 6);

struct ScalarSolution {
  ScalarDensity density;
  SolveReport report;
};

// Solves T psi = u^i. The resulting density absorbs the aperture Green's
// function normalization: the physical representation below uses the plain
// free-space kernel against it.
ScalarSolution solve_scalar(const geo::ApertureMesh& mesh, const ScalarWave& wave,
                            const singular::PairOptions& opt = {}, int threads = 1);

// Scattered field u^s(r) = -+ int_Gamma g(r, r') psi(r') dr' (minus above the
// plane, plus below). On-plane evaluations use the closed-form static part
// (single-layer trace is continuous); points hovering within 0.1 h of the
// plane over the mesh are refused rather than extrapolated.
Complex eval_us_scalar(const geo::ApertureMesh& mesh, const ScalarDensity& density,
                       const Vec3& r, const singular::InnerOptions& opt = {});

// Total integral of the density, int_Gamma psi.
Complex density_integral(const geo::ApertureMesh& mesh, const ScalarDensity& density);

}  // namespace aperture::scalar_bie
