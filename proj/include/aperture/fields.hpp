#pragma once

#include "aperture/geometry.hpp"
#include "aperture/report.hpp"
#include "aperture/scalar_bie.hpp"
#include "aperture/singular.hpp"
#include "aperture/spectra.hpp"
#include "aperture/types.hpp"
#include "aperture/vector_bie.hpp"

namespace aperture::fields {

using vector_bie::VectorDensity;
using vector_bie::WaveContext;

// RT0 field value inside its cell (zero outside the mesh).
CVec2 density_value(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                    const VectorDensity& w, const Vec2& x);

// Incident + reflected fields of the upper half space (zero below the plane).
struct PlaneWaveFields {
  CVec3 e, h;
};
PlaneWaveFields incident_plus_reflected(const WaveContext& wave, const Vec3& r);

// Scattered magnetic field from the aperture density,
//   upper: H^s = -ik int G2+(r,r') W ds',
//   lower: H^s = +ik int [G(r,r') + D G(rbar,r')] W ds'
// (the lower kernel is the parity-corrected mirror of G2+; it shares its
// tangential trace and radiates an outgoing Maxwell field).
// Evaluations within 0.1 h of the mesh plane are refused.
CVec3 eval_Hs(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
              const VectorDensity& w, const Vec3& r);

// Scattered electric field E^s = (i/k) curl H^s through the closed-form
// kernel curls (no finite differences).
CVec3 eval_Es(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
              const VectorDensity& w, const Vec3& r);

// Tangential scattered H on the plane itself (PV-free: closed-form static
// parts plus bounded remainders). below = lower-side limit; the upper-side
// scattered field is its negative.
CVec2 tangential_Hs_plane(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                          const VectorDensity& w, const Vec2& x, bool below,
                          const singular::InnerOptions& opt = {});

// Far-field amplitude of the transmitted field: H^s ~ (e^{ikr}/r) F(rhat),
//   F(rhat) = (ik/2pi) (I - rhat rhat^T) int e^{-ik rhat.r'} W ds'.
// Requires rhat in the lower hemisphere.
CVec3 far_field(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                const VectorDensity& w, const Vec3& rhat);

// Transmitted power two ways plus tau = P / (1/2 |E^i x conj(H^i)| Area).
// The aperture flux P = -(1/2) Re int_Gamma W . conj(H_t below) reduces
// exactly to -(1/k) Im B(W,W); the imaginary part lives on |xi| < k, where it
// is a sign-definite integral evaluated nodewise (no cancellation):
//   P = (1/4pi^2 k) int_{|xi|<k} [ sqrt(k^2-|xi|^2)|a1|^2
//                                  + k^2 |a2|^2 / sqrt(k^2-|xi|^2) ] dxi.
// The far-field route integrates |F|^2 over the lower hemisphere.
PowerReport transmission(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                         const VectorDensity& w, const WaveContext& wave,
                         const spectra::SpectralGrid& grid, int n_far_polar = 24,
                         int n_far_azimuth = 48);

struct SamplePlan {
  int n_screen = 16;        // on-plane points outside the aperture
  int n_aperture = 12;      // on-plane points inside
  int n_volume = 8;         // off-plane points for Maxwell residuals
  double fd_step = 1e-4;    // finite-difference step for the curl oracle
  double offplane_z = 0.4;  // |z| of the volume samples (times aperture radius)
  unsigned seed = 7;
};

// Physics residual aggregates for a solved vector problem; all entries land
// in SolveReport.metrics.
SolveReport residual_suite(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                           const VectorDensity& w, const WaveContext& wave,
                           const SamplePlan& plan = {});

// Scalar counterpart (Helmholtz residual, aperture continuity, screen
// Neumann residual, Sommerfeld decay).
SolveReport scalar_residual_suite(const geo::ApertureMesh& mesh,
                                  const scalar_bie::ScalarDensity& psi,
                                  const scalar_bie::ScalarWave& wave,
                                  const SamplePlan& plan = {});

}  // namespace aperture::fields
