#include "aperture/fields.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "aperture/greens.hpp"

namespace aperture::fields {

namespace {

const Eigen::Matrix3d kMirror = Eigen::Vector3d(1, 1, -1).asDiagonal();

struct CellBasis {
  int dof[3];
  double coef[3];
  Vec2 opp[3];
  double div[3];
  int count = 0;
};

std::vector<CellBasis> cell_bases(const geo::ApertureMesh& mesh,
                                  const geo::DofTable& dofs) {
  std::vector<CellBasis> out(mesh.n_cells());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double area = mesh.cell_area(c);
    for (int i = 0; i < 3; ++i) {
      const int e = mesh.cell_edges[c][i];
      const int dof = dofs.edge_dof[e];
      if (dof < 0) continue;
      CellBasis& cb = out[c];
      const double s = mesh.cell_edge_sign[c][i];
      const double len = mesh.edge_length(e);
      cb.dof[cb.count] = dof;
      cb.coef[cb.count] = s * len / (2.0 * area);
      cb.opp[cb.count] = mesh.vertex_of(c, i);
      cb.div[cb.count] = s * len / area;
      ++cb.count;
    }
  }
  return out;
}

CVec2 cell_field(const CellBasis& cb, const CVecX& w, const Vec2& x) {
  CVec2 v = CVec2::Zero();
  for (int a = 0; a < cb.count; ++a)
    v += w[cb.dof[a]] * cb.coef[a] * (x - cb.opp[a]).cast<Complex>();
  return v;
}

Complex cell_div(const CellBasis& cb, const CVecX& w) {
  Complex d = 0.0;
  for (int a = 0; a < cb.count; ++a) d += w[cb.dof[a]] * cb.div[a];
  return d;
}

int quad_order_for(double dist, double h) {
  if (dist > 8 * h) return 3;
  if (dist > 4 * h) return 5;
  if (dist > 2 * h) return 7;
  return 10;
}

void check_near_exclusion(const geo::ApertureMesh& mesh, const Vec3& r) {
  const Vec2 x(r.x(), r.y());
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double h = mesh.cell_diameter(c);
    if (std::abs(r.z()) < 0.1 * h && (x - mesh.cell_centroid(c)).norm() < h)
      throw std::domain_error("field evaluation inside the near-field exclusion");
  }
}

}  // namespace

CVec2 density_value(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                    const VectorDensity& w, const Vec2& x) {
  const auto bases = cell_bases(mesh, dofs);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Vec2 a = mesh.vertex_of(c, 0), b = mesh.vertex_of(c, 1),
               cc = mesh.vertex_of(c, 2);
    if (quad::triangle_area(a, b, x) >= 0 && quad::triangle_area(b, cc, x) >= 0 &&
        quad::triangle_area(cc, a, x) >= 0)
      return cell_field(bases[c], w.coeffs, x);
  }
  return CVec2::Zero();
}

PlaneWaveFields incident_plus_reflected(const WaveContext& wave, const Vec3& r) {
  PlaneWaveFields f;
  if (r.z() < 0) {
    f.e = CVec3::Zero();
    f.h = CVec3::Zero();
    return f;
  }
  const Complex pi = std::exp(kI * wave.k * wave.m.dot(r));
  const Complex pr = std::exp(kI * wave.k * wave.m.dot(greens::reflect(r)));
  // E^r = -(I - 2 e3 e3^T) p e^{ik m.rbar}, H^r = (I - 2 e3 e3^T) q e^{..}.
  const Vec3 pm = kMirror * wave.p;
  const Vec3 qm = kMirror * wave.q;
  f.e = wave.p.cast<Complex>() * pi - pm.cast<Complex>() * pr;
  f.h = wave.q.cast<Complex>() * pi + qm.cast<Complex>() * pr;
  return f;
}

CVec3 eval_Hs(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
              const VectorDensity& w, const Vec3& r) {
  check_near_exclusion(mesh, r);
  const auto bases = cell_bases(mesh, dofs);
  const double k = w.k;
  const bool upper = r.z() > 0;
  CVec3 acc = CVec3::Zero();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double h = mesh.cell_diameter(c);
    const double dist = std::sqrt(
        std::pow((Vec2(r.x(), r.y()) - mesh.cell_centroid(c)).norm(), 2) + r.z() * r.z());
    const auto& rule = quad::cell_quadrature(quad_order_for(dist, h));
    for (const auto& p : quad::map_rule(rule, mesh.vertex_of(c, 0),
                                        mesh.vertex_of(c, 1), mesh.vertex_of(c, 2))) {
      const CVec2 wt = cell_field(bases[c], w.coeffs, p.x);
      const CVec3 w3(wt.x(), wt.y(), Complex(0));
      const Vec3 rp(p.x.x(), p.x.y(), 0.0);
      // G(r,r') + D G(rbar,r'): the kernel is parity-symmetric, only the
      // prefactor sign distinguishes the half spaces.
      const CVec3 kern =
          greens::dyadic_G(r, rp, k) * w3 +
          kMirror.cast<Complex>() * (greens::dyadic_G(greens::reflect(r), rp, k) * w3);
      acc += p.w * kern;
    }
  }
  return (upper ? -kI * k : kI * k) * acc;
}

CVec3 eval_Es(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
              const VectorDensity& w, const Vec3& r) {
  check_near_exclusion(mesh, r);
  const auto bases = cell_bases(mesh, dofs);
  const double k = w.k;
  const bool upper = r.z() > 0;
  CVec3 acc = CVec3::Zero();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double h = mesh.cell_diameter(c);
    const double dist = std::sqrt(
        std::pow((Vec2(r.x(), r.y()) - mesh.cell_centroid(c)).norm(), 2) + r.z() * r.z());
    const auto& rule = quad::cell_quadrature(quad_order_for(dist, h));
    for (const auto& p : quad::map_rule(rule, mesh.vertex_of(c, 0),
                                        mesh.vertex_of(c, 1), mesh.vertex_of(c, 2))) {
      const CVec2 wt = cell_field(bases[c], w.coeffs, p.x);
      const CVec3 w3(wt.x(), wt.y(), Complex(0));
      const Vec3 rp(p.x.x(), p.x.y(), 0.0);
      // curl_r of the kernel applied to w: grad g x w for the direct term,
      // -D (grad g)(rbar) x w for the mirrored term (pseudovector pullback).
      const CVec3 direct = greens::grad_g(r, rp, k).cross(w3);
      const CVec3 image =
          kMirror.cast<Complex>() * (greens::grad_g(greens::reflect(r), rp, k).cross(w3));
      acc += p.w * (direct - image);
    }
  }
  // E^s = (i/k) curl H^s with the +-ik prefactors of the representation.
  return (upper ? Complex(1.0) : Complex(-1.0)) * acc;
}

CVec2 tangential_Hs_plane(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                          const VectorDensity& w, const Vec2& x, bool below,
                          const singular::InnerOptions& opt) {
  const auto bases = cell_bases(mesh, dofs);
  const double k = w.k;
  // H_t(below) = 2ik [ (int g0 W)_t + (1/k^2) grad int g0 div W ].
  CVec2 layer = CVec2::Zero();
  CVec2 grad = CVec2::Zero();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const singular::Triangle tri{mesh.vertex_of(c, 0), mesh.vertex_of(c, 1),
                                 mesh.vertex_of(c, 2)};
    const CellBasis& cb = bases[c];
    const auto in = singular::inner_integral(tri, x, k, opt);
    for (int a = 0; a < cb.count; ++a) {
      const Complex wi = w.coeffs[cb.dof[a]];
      layer += wi * cb.coef[a] * (in.i1 - in.i0 * cb.opp[a].cast<Complex>());
    }
    const Complex dv = cell_div(cb, w.coeffs);
    if (dv != Complex(0))
      grad += dv * singular::inner_gradient(tri, x, k, opt);
  }
  const CVec2 ht = (2.0 * kI * k) * (layer + grad / (k * k));
  return below ? ht : CVec2(-ht);
}

CVec3 far_field(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                const VectorDensity& w, const Vec3& rhat) {
  if (std::abs(rhat.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("far_field: direction must be a unit vector");
  if (!(rhat.z() < 0))
    throw std::invalid_argument("far_field: direction must lie in the lower hemisphere");
  const auto bases = cell_bases(mesh, dofs);
  const double k = w.k;
  CVec3 m = CVec3::Zero();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const int order = std::min(12, 4 + static_cast<int>(k * mesh.cell_diameter(c)));
    const auto& rule = quad::cell_quadrature(order);
    for (const auto& p : quad::map_rule(rule, mesh.vertex_of(c, 0),
                                        mesh.vertex_of(c, 1), mesh.vertex_of(c, 2))) {
      const CVec2 wt = cell_field(bases[c], w.coeffs, p.x);
      const Complex phase =
          std::exp(-kI * k * (rhat.x() * p.x.x() + rhat.y() * p.x.y()));
      m += p.w * phase * CVec3(wt.x(), wt.y(), Complex(0));
    }
  }
  const CVec3 proj = m - rhat.cast<Complex>() * (rhat.cast<Complex>().dot(m));
  return (kI * k / (2.0 * kPi)) * proj;
}

PowerReport transmission(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                         const VectorDensity& w, const WaveContext& wave,
                         const spectra::SpectralGrid& grid, int n_far_polar,
                         int n_far_azimuth) {
  PowerReport rep;
  const double area = mesh.total_area();
  // |E^i x conj(H^i)| = |p x q| = 1 for the unit plane wave.
  rep.incident_flux = 0.5 * area;
  if (rep.incident_flux <= 0 || w.coeffs.size() == 0 || w.coeffs.norm() == 0)
    throw std::invalid_argument("transmission: zero incident flux or empty density");

  // Aperture flux over the propagating disc |xi| < k, nodewise sign-definite.
  {
    const basis::MeshTransforms mt(mesh, dofs);
    const double k = wave.k;
    double acc = 0.0;
    CVecX a1, a2;
    for (std::size_t q = 0; q < grid.n_nodes(); ++q) {
      const double rho = grid.node(q).norm();
      if (rho >= k) continue;
      mt.rt0_components(grid.node(q), a1, a2);
      const Complex va1 = a1.transpose() * w.coeffs;
      const Complex va2 = a2.transpose() * w.coeffs;
      // u = sqrt(k^2 - rho^2) recovered stably from the stored symbol.
      const double u = 1.0 / (2.0 * grid.symbol(q).imag());
      const double wq = grid.weight(q);
      acc += wq * u * std::norm(va1) + k * k * (wq / u) * std::norm(va2);
    }
    rep.transmitted_aperture = acc / (4.0 * kPi * kPi * wave.k);
  }

  // Far-field route: P = (1/2) int_{lower} |F|^2 dOmega.
  double pf = 0.0;
  std::vector<double> mu, wmu;
  quad::gauss_on_interval(n_far_polar, -1.0, 0.0, mu, wmu);
  for (int i = 0; i < n_far_polar; ++i) {
    const double st = std::sqrt(1.0 - mu[i] * mu[i]);
    for (int j = 0; j < n_far_azimuth; ++j) {
      const double phi = 2.0 * kPi * (j + 0.5) / n_far_azimuth;
      const Vec3 rhat(st * std::cos(phi), st * std::sin(phi), mu[i]);
      pf += wmu[i] * (2.0 * kPi / n_far_azimuth) *
            far_field(mesh, dofs, w, rhat).squaredNorm();
    }
  }
  rep.transmitted_far = 0.5 * pf;

  rep.tau = rep.transmitted_aperture / rep.incident_flux;
  rep.flux_disagreement =
      std::abs(rep.transmitted_aperture - rep.transmitted_far) /
      std::max(rep.transmitted_aperture, 1e-300);
  rep.flux_agreement_ok = rep.flux_disagreement < 0.02;
  return rep;
}

namespace {

CVec3 fd_curl(const std::function<CVec3(const Vec3&)>& f, const Vec3& r, double h) {
  CVec3 c;
  std::array<CVec3, 3> dp, dm;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    dp[a] = f(r + e);
    dm[a] = f(r - e);
  }
  const auto d = [&](int a, int comp) {
    return (dp[a][comp] - dm[a][comp]) / (2.0 * h);
  };
  c[0] = d(1, 2) - d(2, 1);
  c[1] = d(2, 0) - d(0, 2);
  c[2] = d(0, 1) - d(1, 0);
  return c;
}

}  // namespace

SolveReport residual_suite(const geo::ApertureMesh& mesh, const geo::DofTable& dofs,
                           const VectorDensity& w, const WaveContext& wave,
                           const SamplePlan& plan) {
  SolveReport rep;
  rep.unknowns = static_cast<int>(w.coeffs.size());
  std::mt19937 rng(plan.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double radius = 0.5 * mesh.diameter();
  const double hscale = 2.0;  // tangential incident-plus-reflected H scale

  // Screen samples: ring outside the aperture at 1.3..2.2 radius.
  double screen_e = 0.0, screen_h = 0.0;
  for (int s = 0; s < plan.n_screen; ++s) {
    const double rr = radius * (1.3 + 0.9 * unif(rng));
    const double th = 2.0 * kPi * unif(rng);
    const Vec3 r(rr * std::cos(th), rr * std::sin(th), 0.0);
    // On the screen the upper-side representation applies from above.
    const Vec3 r_up(r.x(), r.y(), 1e-12);
    const auto inc = incident_plus_reflected(wave, r);
    const CVec3 es = eval_Es(mesh, dofs, w, r_up);
    const CVec3 hs = eval_Hs(mesh, dofs, w, r_up);
    const CVec3 et = inc.e + es;
    const CVec3 ht = inc.h + hs;
    screen_e = std::max(screen_e, std::hypot(std::abs(et.x()), std::abs(et.y())) / hscale);
    screen_h = std::max(screen_h, std::abs(ht.z()) / hscale);
  }
  rep.metrics["screen_tangential_E"] = screen_e;
  rep.metrics["screen_normal_H"] = screen_h;

  // Aperture tangential-H continuity, strong form on the plane.
  double cont = 0.0;
  for (int s = 0; s < plan.n_aperture; ++s) {
    const double rr = radius * std::sqrt(unif(rng)) * 0.9;
    const double th = 2.0 * kPi * unif(rng);
    const Vec2 x(rr * std::cos(th), rr * std::sin(th));
    const CVec2 below = tangential_Hs_plane(mesh, dofs, w, x, /*below=*/true);
    const Complex phase = std::exp(kI * wave.k * (wave.m.x() * x.x() + wave.m.y() * x.y()));
    const CVec2 inc_t(2.0 * wave.q.x() * phase, 2.0 * wave.q.y() * phase);
    cont = std::max(cont, (inc_t - 2.0 * below).norm() / hscale);
  }
  rep.metrics["aperture_Ht_continuity"] = cont;

  // Maxwell residuals by finite-difference curls at off-plane points.
  double mx = 0.0;
  for (int s = 0; s < plan.n_volume; ++s) {
    const double sign = (s % 2 == 0) ? 1.0 : -1.0;
    const Vec3 r(radius * (unif(rng) - 0.5), radius * (unif(rng) - 0.5),
                 sign * plan.offplane_z * radius * (1.0 + unif(rng)));
    const CVec3 curl_h = fd_curl(
        [&](const Vec3& p) { return eval_Hs(mesh, dofs, w, p); }, r, plan.fd_step);
    const CVec3 curl_e = fd_curl(
        [&](const Vec3& p) { return eval_Es(mesh, dofs, w, p); }, r, plan.fd_step);
    const CVec3 es = eval_Es(mesh, dofs, w, r);
    const CVec3 hs = eval_Hs(mesh, dofs, w, r);
    const double scale = std::max({hs.norm(), es.norm(), 1e-300});
    mx = std::max(mx, (curl_h + kI * wave.k * es).norm() / (wave.k * scale));
    mx = std::max(mx, (curl_e - kI * wave.k * hs).norm() / (wave.k * scale));
  }
  rep.metrics["maxwell_fd_residual"] = mx;

  // Silver-Muller quantity |r| |H x rhat - E| along a downward ray.
  const Vec3 ray = Vec3(0.35, -0.2, -0.92).normalized();
  for (double kr : {50.0, 100.0}) {
    const Vec3 r = (kr / wave.k) * ray;
    const CVec3 hs = eval_Hs(mesh, dofs, w, r);
    const CVec3 es = eval_Es(mesh, dofs, w, r);
    const CVec3 sm = hs.cross(ray.cast<Complex>()) - es;
    rep.metrics["silver_muller_kr" + std::to_string(static_cast<int>(kr))] =
        r.norm() * sm.norm();
  }
  return rep;
}

SolveReport scalar_residual_suite(const geo::ApertureMesh& mesh,
                                  const scalar_bie::ScalarDensity& psi,
                                  const scalar_bie::ScalarWave& wave,
                                  const SamplePlan& plan) {
  SolveReport rep;
  rep.unknowns = static_cast<int>(psi.coeffs.size());
  std::mt19937 rng(plan.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double radius = 0.5 * mesh.diameter();

  // Total-field continuity across the aperture: (u^i+u^r+u^s)|above equals
  // u^s|below; on the plane u^s(above) = -u^s(below) with u^i = u^r.
  double cont = 0.0;
  for (int s = 0; s < plan.n_aperture; ++s) {
    const double rr = radius * std::sqrt(unif(rng)) * 0.9;
    const double th = 2.0 * kPi * unif(rng);
    const Vec3 r(rr * std::cos(th), rr * std::sin(th), 0.0);
    const Complex us_above = scalar_bie::eval_us_scalar(mesh, psi, r);
    const auto inc = scalar_bie::incident_scalar(wave, r);
    cont = std::max(cont, std::abs(inc.ui + inc.ur + 2.0 * us_above));
  }
  rep.metrics["aperture_continuity"] = cont;

  // Screen Neumann residual: two-sided difference of the single-layer value
  // straddling the plane at screen points. The kernel is even in z, so this
  // vanishes to rounding; refinement must keep it at the noise floor.
  double neu = 0.0;
  for (int s = 0; s < plan.n_screen; ++s) {
    const double rr = radius * (1.3 + 0.9 * unif(rng));
    const double th = 2.0 * kPi * unif(rng);
    const double dz = 0.05 * radius;
    const Vec3 up(rr * std::cos(th), rr * std::sin(th), dz);
    const Vec3 dn(up.x(), up.y(), -dz);
    // eval(z>0) = -S, eval(z<0) = +S, so the sum differences S across z = 0.
    const Complex diff = scalar_bie::eval_us_scalar(mesh, psi, up) +
                         scalar_bie::eval_us_scalar(mesh, psi, dn);
    neu = std::max(neu, std::abs(diff) / (2.0 * dz));
  }
  rep.metrics["screen_neumann"] = neu;

  // Helmholtz residual by 7-point finite differences off the plane.
  double helm = 0.0;
  for (int s = 0; s < plan.n_volume; ++s) {
    const double sign = (s % 2 == 0) ? 1.0 : -1.0;
    const Vec3 r(radius * (unif(rng) - 0.5), radius * (unif(rng) - 0.5),
                 sign * plan.offplane_z * radius * (1.0 + unif(rng)));
    const double h = plan.fd_step;
    Complex lap = -6.0 * scalar_bie::eval_us_scalar(mesh, psi, r);
    for (int a = 0; a < 3; ++a) {
      Vec3 e = Vec3::Zero();
      e[a] = h;
      lap += scalar_bie::eval_us_scalar(mesh, psi, r + e) +
             scalar_bie::eval_us_scalar(mesh, psi, r - e);
    }
    lap /= h * h;
    const Complex u = scalar_bie::eval_us_scalar(mesh, psi, r);
    helm = std::max(helm, std::abs(lap + wave.k * wave.k * u) /
                              std::max(wave.k * wave.k * std::abs(u), 1e-300));
  }
  rep.metrics["helmholtz_fd_residual"] = helm;

  // Sommerfeld decay |r (d/dr - ik) u^s| along a downward ray.
  const Vec3 ray = Vec3(0.3, 0.25, -0.92).normalized();
  for (double kr : {50.0, 100.0}) {
    const double rr = (wave.k > 0 ? kr / wave.k : kr);
    const double h = plan.fd_step;
    const Complex up = scalar_bie::eval_us_scalar(mesh, psi, (rr + h) * ray);
    const Complex um = scalar_bie::eval_us_scalar(mesh, psi, (rr - h) * ray);
    const Complex u0 = scalar_bie::eval_us_scalar(mesh, psi, rr * ray);
    const Complex dr = (up - um) / (2.0 * h);
    rep.metrics["sommerfeld_kr" + std::to_string(static_cast<int>(kr))] =
        rr * std::abs(dr - kI * wave.k * u0);
  }
  return rep;
}

}  // namespace aperture::fields
