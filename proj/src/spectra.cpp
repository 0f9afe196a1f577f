#include "aperture/spectra.hpp"

#include <cmath>
#include <stdexcept>

#include <fftw3.h>

#include "aperture/quadrature.hpp"

namespace aperture::spectra {

namespace {

double default_eps(double k) { return (k > 0 ? 1e-8 * k : 0.0); }

}  // namespace

Complex symbol_g0(const Vec2& xi, double k, double eps_band) {
  const double r = xi.norm();
  if (eps_band < 0) eps_band = default_eps(k);
  if (k > 0 && std::abs(r - k) < eps_band)
    throw std::domain_error("symbol_g0: evaluation inside the exclusion band at |xi| = k");
  if (r < k) return kI / (2.0 * std::sqrt(k * k - r * r));
  if (r == 0.0) throw std::domain_error("symbol_g0: static symbol singular at xi = 0");
  return 1.0 / (2.0 * std::sqrt(r * r - k * k));
}

namespace {

// Composite Gauss panels on [a, b]; returns nodes/weights appended.
void composite_gauss(double a, double b, int n_total, int per_panel,
                     std::vector<double>& x, std::vector<double>& w) {
  const int n_panels = std::max(1, n_total / per_panel);
  std::vector<double> px, pw;
  for (int p = 0; p < n_panels; ++p) {
    const double lo = a + (b - a) * p / n_panels;
    const double hi = a + (b - a) * (p + 1) / n_panels;
    quad::gauss_on_interval(per_panel, lo, hi, px, pw);
    x.insert(x.end(), px.begin(), px.end());
    w.insert(w.end(), pw.begin(), pw.end());
  }
}

}  // namespace

SpectralGrid build_spectral_grid(double k, double xi_max, int n_radial,
                                 int n_angular, double eps_band) {
  if (k < 0) throw std::invalid_argument("build_spectral_grid: k must be >= 0");
  if (!(xi_max > 2.0 * k))
    throw std::invalid_argument("build_spectral_grid: xi_max must exceed 2k");
  if (n_radial < 1 || n_angular < 1)
    throw std::invalid_argument("build_spectral_grid: node counts must be positive");
  if (eps_band < 0) eps_band = default_eps(k);

  SpectralGrid grid;
  grid.k = k;
  grid.xi_max = xi_max;
  grid.eps_band = eps_band;
  grid.n_radial = n_radial;
  grid.n_angular = n_angular;

  std::vector<double> u, wu;
  if (k == 0.0) {
    // No branch point; plain radial panels.
    composite_gauss(0.0, xi_max, n_radial, 10, u, wu);
    for (std::size_t i = 0; i < u.size(); ++i) {
      grid.rho.push_back(u[i]);
      grid.rho_weight.push_back(u[i] * wu[i]);
      grid.g0.push_back(1.0 / (2.0 * u[i]));
    }
  } else {
    // rho < k: u = sqrt(k^2 - rho^2); the band |rho - k| < eps is excluded
    // by starting u at u0 (negligible sliver, integrands are bounded in u).
    const double u0_in = std::sqrt(std::max(k * k - (k - eps_band) * (k - eps_band), 0.0));
    u.clear();
    wu.clear();
    composite_gauss(u0_in, k, n_radial / 2, 10, u, wu);
    for (std::size_t i = 0; i < u.size(); ++i) {
      grid.rho.push_back(std::sqrt(std::max(k * k - u[i] * u[i], 0.0)));
      grid.rho_weight.push_back(u[i] * wu[i]);
      grid.g0.push_back(kI / (2.0 * u[i]));
    }
    // rho > k: u = sqrt(rho^2 - k^2).
    const double u0_out = std::sqrt((k + eps_band) * (k + eps_band) - k * k);
    const double u_hi = std::sqrt(xi_max * xi_max - k * k);
    u.clear();
    wu.clear();
    composite_gauss(u0_out, u_hi, n_radial - n_radial / 2, 10, u, wu);
    for (std::size_t i = 0; i < u.size(); ++i) {
      grid.rho.push_back(std::sqrt(k * k + u[i] * u[i]));
      grid.rho_weight.push_back(u[i] * wu[i]);
      grid.g0.push_back(1.0 / (2.0 * u[i]));
    }
  }

  grid.theta.resize(n_angular);
  for (int i = 0; i < n_angular; ++i)
    grid.theta[i] = 2.0 * kPi * (i + 0.5) / n_angular;
  grid.theta_weight = 2.0 * kPi / n_angular;

  for (double r : grid.rho)
    if (k > 0 && std::abs(r - k) < eps_band)
      throw std::runtime_error("build_spectral_grid: node inside exclusion band");
  return grid;
}

namespace {

// Closed-form Hankel integrals (1/2pi) int_0^inf s(rho) J0(rho d) rho drho of
// the smooth tail-matching terms
//   s1 = 1/(2 sqrt(rho^2+k^2)),
//   s2 = (k^2/2)(rho^2+k^2)^{-3/2},
//   s3 = (3k^4/4)(rho^2+k^2)^{-5/2},
// chosen so that ghat0 - (s1+s2+s3) = O(rho^{-7}).
double tail_terms(double rho, double k) {
  const double q = rho * rho + k * k;
  const double sq = std::sqrt(q);
  return 1.0 / (2.0 * sq) + 0.5 * k * k / (q * sq) + 0.75 * k * k * k * k / (q * q * sq);
}

Complex tail_closed_form(double d, double k) {
  const double e = std::exp(-k * d);
  return e / (4.0 * kPi * d) + k * e / (4.0 * kPi) + k * (1.0 + k * d) * e / (8.0 * kPi);
}

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, x); }

}  // namespace

WeylResult weyl_check(const Vec2& x, const Vec2& xp, double k,
                      const SpectralGrid& grid) {
  const double d = (x - xp).norm();
  if (d == 0.0) throw std::domain_error("weyl_check: coincident points");

  WeylResult res;
  // Resolve the radial oscillation J0(rho d): a few points per period.
  const double u_hi = std::sqrt(std::max(grid.xi_max * grid.xi_max - k * k, 1e-30));
  const int n_out = std::min(
      60000, std::max(grid.n_radial, static_cast<int>(6.0 * grid.xi_max * d / kPi) + 40));

  Complex acc = 0.0;
  std::vector<double> u, wu;
  if (k > 0) {
    composite_gauss(0.0, k, std::max(grid.n_radial / 2, n_out / 4), 10, u, wu);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double rho = std::sqrt(std::max(k * k - u[i] * u[i], 0.0));
      const Complex f = kI / (2.0 * u[i]) - tail_terms(rho, k);
      acc += f * bessel_j0(rho * d) * u[i] * wu[i];
    }
    u.clear();
    wu.clear();
    composite_gauss(0.0, u_hi, n_out, 10, u, wu);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double rho = std::sqrt(k * k + u[i] * u[i]);
      const Complex f = 1.0 / (2.0 * u[i]) - tail_terms(rho, k);
      acc += f * bessel_j0(rho * d) * u[i] * wu[i];
    }
  }
  // For k = 0 the subtraction term s1 equals the symbol identically and the
  // numeric part vanishes; the closed form alone is exact.
  res.value = acc / (2.0 * kPi) + tail_closed_form(d, k);

  // Residual integrand is ~ (5k^6/2) rho^{-7}; bound the oscillatory tail by
  // its envelope.
  const double Xi = grid.xi_max;
  res.tail_bound = (k > 0)
                       ? (5.0 * std::pow(k, 6) / 2.0) * std::sqrt(2.0 / (kPi * Xi * d)) /
                             (2.0 * kPi * 5.0 * std::pow(Xi, 5)) * Xi
                       : 0.0;
  const double scale = 1.0 / (4.0 * kPi * d);
  res.accurate = res.tail_bound < 1e-7 * scale;
  return res;
}

HelmholtzComponents helmholtz_decompose(const CVec2& v_hat, const Vec2& xi) {
  const double r = xi.norm();
  if (r == 0.0)
    throw std::domain_error("helmholtz_decompose: undefined at xi = 0");
  const Vec2 xh = xi / r;
  const Vec2 xp(xh.y(), -xh.x());
  HelmholtzComponents c;
  c.a1 = v_hat.x() * xh.x() + v_hat.y() * xh.y();
  c.a2 = v_hat.x() * xp.x() + v_hat.y() * xp.y();
  return c;
}

std::vector<Complex> dft2(const SampledField& f) {
  const int n = f.n;
  std::vector<Complex> out(static_cast<std::size_t>(n) * n);
  fftw_plan plan = fftw_plan_dft_2d(
      n, n,
      reinterpret_cast<fftw_complex*>(const_cast<Complex*>(f.values.data())),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  // DFT approximates the continuous transform after scaling by dx^2 (the
  // grid is origin-centered; the resulting linear phase does not matter for
  // the norms, which use |fhat| only).
  const double s = f.dx * f.dx;
  for (auto& v : out) v *= s;
  return out;
}

Vec2 xi_of(const SampledField& f, int ix, int iy) {
  auto wrap = [&](int i) { return (i <= f.n / 2 - 1) ? i : i - f.n; };
  const double dxi = 2.0 * kPi / (f.n * f.dx);
  return Vec2(wrap(ix) * dxi, wrap(iy) * dxi);
}

double sobolev_norm(const SampledField& f, double s) {
  if (s != 0.5 && s != -0.5)
    throw std::invalid_argument("sobolev_norm: exponent must be +-1/2");
  if (f.n <= 0 || f.dx <= 0 || f.values.size() != static_cast<std::size_t>(f.n) * f.n)
    throw std::invalid_argument("sobolev_norm: malformed sample grid");
  if (f.support_n <= 0 || f.n < 4 * f.support_n)
    throw std::invalid_argument("sobolev_norm: padding factor below 4");
  // The claimed support is the centered support_n block; anything outside
  // would alias under the fractional weight.
  const int lo = (f.n - f.support_n) / 2, hi = lo + f.support_n;
  for (int iy = 0; iy < f.n; ++iy)
    for (int ix = 0; ix < f.n; ++ix)
      if ((iy < lo || iy >= hi || ix < lo || ix >= hi) &&
          std::abs(f.values[static_cast<std::size_t>(iy) * f.n + ix]) != 0.0)
        throw std::invalid_argument("sobolev_norm: field leaks outside the unpadded region");

  const auto fhat = dft2(f);
  const double dxi = 2.0 * kPi / (f.n * f.dx);
  double acc = 0.0;
  for (int iy = 0; iy < f.n; ++iy)
    for (int ix = 0; ix < f.n; ++ix) {
      const Vec2 xi = xi_of(f, ix, iy);
      const double w = std::pow(1.0 + xi.squaredNorm(), s);
      acc += w * std::norm(fhat[static_cast<std::size_t>(iy) * f.n + ix]);
    }
  return std::sqrt(acc * dxi * dxi / (4.0 * kPi * kPi));
}

}  // namespace aperture::spectra
