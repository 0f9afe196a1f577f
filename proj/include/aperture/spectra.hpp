#pragma once

#include <vector>

#include "aperture/types.hpp"

namespace aperture::spectra {

// Convention, fixed: forward transform fhat(xi) = int e^{-i x.xi} f(x) dx,
// inverse carries the 1/(4 pi^2) prefactor.

// Half-space symbol ghat0(xi) = i / (2 sqrt(k^2 - |xi|^2)) with the outgoing
// branch sqrt(k^2-|xi|^2) = i sqrt(|xi|^2-k^2) for |xi| > k: purely imaginary
// with positive imaginary part inside the propagating disc, real positive
// outside. k = 0 gives the static symbol 1/(2|xi|).
Complex symbol_g0(const Vec2& xi, double k, double eps_band = -1.0);

struct SpectralGrid {
  double k = 0.0;
  double xi_max = 0.0;
  double eps_band = 0.0;
  int n_radial = 0;
  int n_angular = 0;

  // Radial nodes with weights for int f(rho) rho drho; the 1/sqrt singularity
  // at rho = k is absorbed by the substitution u = sqrt(|rho^2 - k^2|), and
  // g0 holds the symbol evaluated stably from u.
  std::vector<double> rho;
  std::vector<double> rho_weight;
  std::vector<Complex> g0;

  std::vector<double> theta;
  double theta_weight = 0.0;

  std::size_t n_nodes() const { return rho.size() * theta.size(); }
  Vec2 node(std::size_t q) const {
    const std::size_t ir = q / theta.size(), ia = q % theta.size();
    return rho[ir] * Vec2(std::cos(theta[ia]), std::sin(theta[ia]));
  }
  double weight(std::size_t q) const { return rho_weight[q / theta.size()] * theta_weight; }
  Complex symbol(std::size_t q) const { return g0[q / theta.size()]; }

  // Quadrature of a smooth integrand over the truncated plane.
  template <typename F>
  Complex integrate(F&& f) const {
    Complex acc = 0.0;
    for (std::size_t q = 0; q < n_nodes(); ++q) acc += weight(q) * f(node(q));
    return acc;
  }
};

// Polar grid over |xi| <= xi_max. Requires xi_max > 2k (all three symbol
// regimes covered) and positive counts; k = 0 is allowed and gives a plain
// radial grid for static symbols and norm integrals.
SpectralGrid build_spectral_grid(double k, double xi_max, int n_radial,
                                 int n_angular, double eps_band = -1.0);

struct WeylResult {
  Complex value{0.0, 0.0};
  double tail_bound = 0.0;  // estimate of the truncation error
  bool accurate = true;     // false when xi_max is too small for the separation
};

// Inverse-transform quadrature of symbol_g0 at planar separation x - xp.
// The angular integral of the radially symmetric integrand is carried out
// exactly (Bessel J0); the radial quadrature uses the grid's substitution
// plus smooth-tail subtraction so the truncated tail is negligible.
// Contract: matches e^{ik|x-xp|}/(4 pi |x-xp|).
WeylResult weyl_check(const Vec2& x, const Vec2& xp, double k,
                      const SpectralGrid& grid);

struct HelmholtzComponents {
  Complex a1{0.0, 0.0};  // longitudinal, along xi-hat
  Complex a2{0.0, 0.0};  // transverse, along xi-perp-hat = (xi2, -xi1)/|xi|
};

HelmholtzComponents helmholtz_decompose(const CVec2& v_hat, const Vec2& xi);

// Square n x n sample grid with spacing dx, row-major (index iy*n + ix),
// centered on the origin. The field must vanish outside the central
// support_n x support_n block (zero padding).
struct SampledField {
  int n = 0;
  int support_n = 0;
  double dx = 0.0;
  std::vector<Complex> values;
};

// Discrete fractional Sobolev norm
//   sqrt( (1/4pi^2) sum (1+|xi_j|^2)^s |fhat_j|^2 dxi^2 ),
// s in {-1/2, +1/2}. Rejects padding factors below 4 and fields with
// support leaking into the padded frame.
double sobolev_norm(const SampledField& f, double s);

// Forward DFT of the sample grid scaled to approximate the continuous
// transform (multiplied by dx^2), with fftshift-style frequency layout
// handled by xi_of. Exposed for the Parseval and div-symbol checks.
std::vector<Complex> dft2(const SampledField& f);
Vec2 xi_of(const SampledField& f, int ix, int iy);

}  // namespace aperture::spectra
