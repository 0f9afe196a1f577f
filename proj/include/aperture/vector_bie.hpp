#pragma once

#include "aperture/basis_fourier.hpp"
#include "aperture/geometry.hpp"
#include "aperture/report.hpp"
#include "aperture/singular.hpp"
#include "aperture/spectra.hpp"
#include "aperture/types.hpp"

namespace aperture::vector_bie {

struct WaveContext {
  double k = 1.0;
  Vec3 m{0, 0, -1};  // unit propagation direction, m3 < 0
  Vec3 p{1, 0, 0};   // electric polarization, p.m = 0, |p| = 1
  Vec3 q{0, -1, 0};  // magnetic direction, q = m x p

  static WaveContext make(double k, const Vec3& m, const Vec3& p);
  void validate() const;
};

struct VectorDensity {
  double k = 0.0;
  CVecX coeffs;  // interior-edge dofs, unit-flux RT0 basis
};

struct SaddleState {
  VectorDensity u;
  CVecX p_mult;  // interior-vertex P1 multiplier
};

// Load projections (Y, phi_i) with Y = -e3 x (H^i + H^r) on the plane:
// tangential components of q doubled, normal component cancelled, phase
// e^{ik(m1 x1 + m2 x2)}.
CVecX rhs_Y(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
            const WaveContext& wave, int order = 6);

// Right-hand side actually fed to the solver: the tangential-H continuity
// equation with exact kernel constants reads L[W] = (ik/4)(H^i + H^r)_t, so
// load_i = (ik/4) <(H^i+H^r)_t, phi_i>. This equals (ik/4) rot90(Y)
// projected; the physical-continuity tests in the fields module pin it.
CVecX physical_load(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                    const WaveContext& wave, int order = 6);

// Weak form of the operator L on the div-conforming space:
// B_ij = -k^2 int int phi_j(y).phi_i(x) g0 + int int div phi_j div phi_i g0,
// the surface gradient moved onto the test slot (zero normal traces).
// Symmetric non-conjugate by construction.
CMatX assemble_L_spatial(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                         double k, const singular::PairOptions& opt = {},
                         int threads = 1);

// Fourier-side assembly of the same bilinear form,
// B(W,V) = (1/4pi^2) int ghat0 [(|xi|^2-k^2) a1 conj(b1) - k^2 a2 conj(b2)].
CMatX assemble_B_spectral(const basis::MeshTransforms& mt,
                          const spectra::SpectralGrid& grid, double k,
                          int threads = 1);

// Incidence matrix of the surface curl: curl_Gamma lambda_v expanded in the
// unit-flux edge basis has coefficient lambda_v(head) - lambda_v(tail).
Eigen::MatrixXd curl_incidence(const geo::ApertureMesh& mesh,
                               const geo::DofTable& dofs);

// E block of the saddle system, E_iq = B(curl lambda_q, phi_i) = (B C)_iq.
CMatX assemble_E(const CMatX& b, const Eigen::MatrixXd& c);

struct VectorSolution {
  VectorDensity w;
  SolveReport report;
};

VectorSolution solve_direct(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                            const WaveContext& wave,
                            const singular::PairOptions& opt = {}, int threads = 1);
VectorSolution solve_direct_system(const CMatX& b, const CVecX& load, double k);

struct SaddleSolution {
  SaddleState state;
  SolveReport report;  // includes the constraint residual metric
};

// Block system [[B, E], [E^H, 0]] for (U, p); the constraint E(q, U) = 0 is
// enforced exactly (conjugated test slot; its conjugate system is the
// transpose convention, same solution).
SaddleSolution solve_saddle(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                            const WaveContext& wave,
                            const singular::PairOptions& opt = {}, int threads = 1);
SaddleSolution solve_saddle_system(const CMatX& b, const Eigen::MatrixXd& c,
                                   const CVecX& load, double k);

struct CoercivityReport {
  // Garding pair: Re(u^H B u) >= alpha ||u||_X^2 - c ||u||_H^2 over samples.
  double alpha = 0.0;
  double c = 0.0;
  // Inf-sup style quotient for E over multiplier samples:
  // min_q max_{||u||_X=1} Re E(q,u) / (||q||_{1/2} - ||q||_{-1/2})_+.
  double beta = 0.0;
  // Low-frequency transform bound max_{|xi|<=2k} |fhat| / ||f||_{-1/2}.
  double linfty_constant = 0.0;
  int samples = 0;
};

CoercivityReport coercivity_probe(const geo::ApertureMesh& mesh,
                                  const geo::DofTable& dofs, double k,
                                  int n_samples, unsigned seed,
                                  const spectra::SpectralGrid& grid,
                                  const CMatX& b_spatial);

}  // namespace aperture::vector_bie
