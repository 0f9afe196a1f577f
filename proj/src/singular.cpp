#include "aperture/singular.hpp"

#include <algorithm>
#include <cmath>

#include "aperture/quadrature.hpp"

namespace aperture::singular {

namespace {

struct EdgeFrame {
  Vec2 that, nhat;
  double d, la, lb, ra, rb, qa, qb;
};

// Per-edge quantities for the closed forms; Q = l + R computed as
// d^2/(R - l) when l < 0 to avoid cancellation.
EdgeFrame edge_frame(const Vec2& a, const Vec2& b, const Vec2& x) {
  EdgeFrame f;
  const Vec2 t = b - a;
  const double L = t.norm();
  f.that = t / L;
  f.nhat = Vec2(f.that.y(), -f.that.x());  // outward for ccw traversal
  f.d = (a - x).dot(f.nhat);
  f.la = (a - x).dot(f.that);
  f.lb = (b - x).dot(f.that);
  f.ra = (a - x).norm();
  f.rb = (b - x).norm();
  f.qa = (f.la >= 0) ? f.la + f.ra : f.d * f.d / (f.ra - f.la);
  f.qb = (f.lb >= 0) ? f.lb + f.rb : f.d * f.d / (f.rb - f.lb);
  return f;
}

double tri_scale(const Triangle& t) {
  return std::max({(t[0] - t[1]).norm(), (t[1] - t[2]).norm(), (t[2] - t[0]).norm()});
}

}  // namespace

double static_potential(const Triangle& t, const Vec2& x) {
  const double eps = 1e-14 * tri_scale(t);
  double acc = 0.0;
  for (int e = 0; e < 3; ++e) {
    const EdgeFrame f = edge_frame(t[e], t[(e + 1) % 3], x);
    if (std::abs(f.d) <= eps) continue;  // d ln(.) -> 0
    acc += f.d * std::log(f.qb / f.qa);
  }
  return acc / (4.0 * kPi);
}

Vec2 static_potential_grad(const Triangle& t, const Vec2& x) {
  Vec2 acc = Vec2::Zero();
  for (int e = 0; e < 3; ++e) {
    const EdgeFrame f = edge_frame(t[e], t[(e + 1) % 3], x);
    // d^2/(R Q) reduces to (R - l)/R when l < 0; keep both branches exact.
    auto d2_over_rq = [&f](double l, double r, double q) {
      return (l >= 0) ? f.d * f.d / (r * q) : (r - l) / r;
    };
    acc -= f.nhat * std::log(f.qb / f.qa);
    acc -= f.that * (f.d * (1.0 / f.rb - 1.0 / f.ra));
    acc -= f.nhat * (d2_over_rq(f.lb, f.rb, f.qb) - d2_over_rq(f.la, f.ra, f.qa));
  }
  return acc / (4.0 * kPi);
}

Vec2 static_moment(const Triangle& t, const Vec2& x) {
  const double eps = 1e-14 * tri_scale(t);
  Vec2 acc = Vec2::Zero();
  for (int e = 0; e < 3; ++e) {
    const EdgeFrame f = edge_frame(t[e], t[(e + 1) % 3], x);
    const double log_term =
        (std::abs(f.d) <= eps) ? 0.0 : f.d * f.d * std::log(f.qb / f.qa);
    acc += f.nhat * 0.5 * (f.lb * f.rb - f.la * f.ra + log_term);
  }
  return acc / (4.0 * kPi);
}

Complex remainder_kernel(double R, double k) {
  const double kr = k * R;
  if (kr < 1e-5) {
    const Complex ik(0.0, k);
    return (ik + ik * ik * R * 0.5 + ik * ik * ik * R * R / 6.0) / (4.0 * kPi);
  }
  return (std::exp(kI * kr) - 1.0) / (4.0 * kPi * R);
}

CVec2 remainder_kernel_grad(const Vec2& x, const Vec2& y, double k) {
  const Vec2 dxy = x - y;
  const double R = dxy.norm();
  const double kr = k * R;
  Complex radial;  // (ikR e^{ikR} - e^{ikR} + 1)/(4 pi R^3), times (x-y)
  if (kr < 1e-4) {
    const Complex ik(0.0, k);
    radial = (ik * ik * 0.5 + ik * ik * ik * R / 3.0) / (4.0 * kPi * R);
  } else {
    const Complex e = std::exp(kI * kr);
    radial = (kI * kr * e - e + 1.0) / (4.0 * kPi * R * R * R);
  }
  return radial * dxy.cast<Complex>();
}

std::vector<quad::PhysicalTrianglePoint> duffy_points(const Triangle& t,
                                                      const Vec2& apex, int n) {
  // Polar wedges around the apex with the sinh substitution in the angle:
  // with tan(psi) = sinh(tau) the ray length d sec(psi) becomes d cosh(tau),
  // so thin wedges (apex close to the opposite edge) stay well resolved and
  // 1/R integrands are handled exactly.
  std::vector<quad::PhysicalTrianglePoint> pts;
  const auto& g = quad::gauss_legendre(n);
  const double scale2 = tri_scale(t) * tri_scale(t);
  for (int e = 0; e < 3; ++e) {
    const Vec2 va = t[e], vb = t[(e + 1) % 3];
    const double a2 = 2.0 * quad::triangle_area(apex, va, vb);
    if (std::abs(a2) < 1e-14 * scale2) continue;  // apex on this edge
    const Vec2 ta = va - apex, tb = vb - apex;
    const Vec2 edge_dir = (vb - va).normalized();
    Vec2 n_hat(edge_dir.y(), -edge_dir.x());
    double d = (va - apex).dot(n_hat);
    if (d < 0) {
      d = -d;
      n_hat = -n_hat;
    }
    const double theta_n = std::atan2(n_hat.y(), n_hat.x());
    auto signed_angle = [&](const Vec2& v) {
      const double raw = std::atan2(v.y(), v.x()) - theta_n;
      return std::remainder(raw, 2.0 * kPi);
    };
    const double psi_a = signed_angle(ta), psi_b = signed_angle(tb);
    const double tau_a = std::asinh(std::tan(psi_a));
    const double tau_b = std::asinh(std::tan(psi_b));
    for (int i = 0; i < n; ++i) {
      const double tau = 0.5 * (tau_a + tau_b) + 0.5 * (tau_b - tau_a) * g.x[i];
      const double wtau = 0.5 * std::abs(tau_b - tau_a) * g.w[i];
      const double cosh_t = std::cosh(tau);
      const double psi = std::atan(std::sinh(tau));
      const double rho_max = d * cosh_t;
      const double theta = theta_n + psi;
      const Vec2 u(std::cos(theta), std::sin(theta));
      for (int j = 0; j < n; ++j) {
        const double s = 0.5 * (g.x[j] + 1.0), ws = 0.5 * g.w[j];
        const double rho = s * rho_max;
        pts.push_back({apex + rho * u, wtau / cosh_t * ws * rho_max * rho});
      }
    }
  }
  return pts;
}

namespace {

Vec2 closest_point_on_triangle(const Triangle& t, const Vec2& x, bool& inside) {
  inside = true;
  double best_d = 1e300;
  Vec2 best = t[0];
  for (int e = 0; e < 3; ++e) {
    const Vec2 a = t[e], b = t[(e + 1) % 3];
    const Vec2 ab = b - a;
    if (quad::triangle_area(a, b, x) < 0) inside = false;
    const double s = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const Vec2 p = a + s * ab;
    const double d = (x - p).norm();
    if (d < best_d) {
      best_d = d;
      best = p;
    }
  }
  return inside ? x : best;
}

int order_for_ratio(double ratio, int lo, int hi) {
  if (ratio > 8.0) return lo;
  if (ratio > 4.0) return std::min(hi, lo + 2);
  if (ratio > 2.0) return std::min(hi, lo + 4);
  return hi;
}

}  // namespace

InnerResult inner_integral(const Triangle& t, const Vec2& x, double k,
                           const InnerOptions& opt) {
  const double diam = tri_scale(t);
  bool inside = false;
  const Vec2 cp = closest_point_on_triangle(t, x, inside);
  const double dist = inside ? 0.0 : (x - cp).norm();

  InnerResult out;
  if (dist > opt.near_ratio * diam) {
    const auto& rule =
        quad::cell_quadrature(order_for_ratio(dist / diam, opt.far_order_lo, opt.far_order_hi));
    for (const auto& p : quad::map_rule(rule, t[0], t[1], t[2])) {
      const double R = (x - p.x).norm();
      const Complex g = std::exp(kI * k * R) / (4.0 * kPi * R);
      out.i0 += p.w * g;
      out.i1 += (p.w * g) * p.x.cast<Complex>();
    }
    return out;
  }

  // Closed-form static part plus smooth remainder on apex-concentrated nodes.
  const double p0 = static_potential(t, x);
  const Vec2 m0 = static_moment(t, x);
  out.i0 = p0;
  out.i1 = (x * p0 + m0).cast<Complex>();
  if (k > 0.0) {
    for (const auto& p : duffy_points(t, cp, opt.duffy_n)) {
      const Complex rem = remainder_kernel((x - p.x).norm(), k);
      out.i0 += p.w * rem;
      out.i1 += (p.w * rem) * p.x.cast<Complex>();
    }
  }
  return out;
}

CVec2 inner_gradient(const Triangle& t, const Vec2& x, double k,
                     const InnerOptions& opt) {
  const double diam = tri_scale(t);
  bool inside = false;
  const Vec2 cp = closest_point_on_triangle(t, x, inside);
  const double dist = inside ? 0.0 : (x - cp).norm();

  if (dist > opt.near_ratio * diam) {
    const auto& rule =
        quad::cell_quadrature(order_for_ratio(dist / diam, opt.far_order_lo, opt.far_order_hi));
    CVec2 acc = CVec2::Zero();
    for (const auto& p : quad::map_rule(rule, t[0], t[1], t[2])) {
      const Vec2 dxy = x - p.x;
      const double R = dxy.norm();
      const Complex g = std::exp(kI * k * R) / (4.0 * kPi * R);
      acc += (p.w * g * (kI * k - 1.0 / R) / R) * dxy.cast<Complex>();
    }
    return acc;
  }

  CVec2 acc = static_potential_grad(t, x).cast<Complex>();
  if (k > 0.0) {
    for (const auto& p : duffy_points(t, cp, opt.duffy_n))
      acc += p.w * remainder_kernel_grad(x, p.x, k);
  }
  return acc;
}

PairClass classify_pair(const geo::ApertureMesh& mesh, int cell_a, int cell_b) {
  if (cell_a == cell_b) return PairClass::Identical;
  int shared = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (mesh.cells[cell_a][i] == mesh.cells[cell_b][j]) ++shared;
  if (shared >= 2) return PairClass::SharedEdge;
  if (shared == 1) return PairClass::SharedVertex;
  return PairClass::Separated;
}

PairOptions PairOptions::quality() {
  PairOptions opt;
  opt.inner.duffy_n = 9;
  opt.inner.far_order_lo = 8;
  opt.inner.far_order_hi = 10;
  opt.graded_levels = 18;
  opt.graded_ratio = 0.6;
  opt.n_s = 6;
  opt.n_t = 8;
  opt.far_order_lo = 8;
  opt.far_order_hi = 10;
  return opt;
}

namespace {

// Outer nodes on the wedge (apex, va, vb), composite Gauss in the ray
// parameter s graded toward the edge (grade_to_edge) or toward the apex.
void wedge_outer_nodes(const Vec2& apex, const Vec2& va, const Vec2& vb,
                       bool grade_to_edge, const PairOptions& opt,
                       std::vector<quad::PhysicalTrianglePoint>& pts) {
  const double a2 = 2.0 * quad::triangle_area(apex, va, vb);
  if (a2 <= 0.0) return;
  std::vector<std::pair<double, double>> s_panels;
  const double q = opt.graded_ratio;
  double lo = 0.0;
  for (int j = 0; j < opt.graded_levels; ++j) {
    const double hi = 1.0 - std::pow(q, j + 1);
    s_panels.push_back({lo, hi});
    lo = hi;
  }
  s_panels.push_back({lo, 1.0});
  if (!grade_to_edge)
    for (auto& p : s_panels) p = {1.0 - p.second, 1.0 - p.first};

  const auto& gs = quad::gauss_legendre(opt.n_s);
  const auto& gt = quad::gauss_legendre(opt.n_t);
  for (const auto& [s0, s1] : s_panels) {
    for (int i = 0; i < opt.n_s; ++i) {
      const double s = 0.5 * (s1 + s0) + 0.5 * (s1 - s0) * gs.x[i];
      const double ws = 0.5 * (s1 - s0) * gs.w[i];
      for (int j = 0; j < opt.n_t; ++j) {
        const double sig = 0.5 * (gt.x[j] + 1.0), wsig = 0.5 * gt.w[j];
        // Quintic smoothstep across the wedge: the vanishing endpoint
        // Jacobian absorbs the corner log singularities of the inner
        // potential (both triangle edges meet there).
        const double u = sig * sig * sig * (10.0 + sig * (-15.0 + 6.0 * sig));
        const double du = 30.0 * sig * sig * (1.0 - sig) * (1.0 - sig);
        const Vec2 x = apex + s * ((1.0 - u) * (va - apex) + u * (vb - apex));
        pts.push_back({x, ws * wsig * du * s * a2});
      }
    }
  }
}

std::vector<quad::PhysicalTrianglePoint> outer_nodes(
    const geo::ApertureMesh& mesh, int cell_outer, int cell_inner,
    PairClass cls, const PairOptions& opt) {
  const Triangle to{mesh.vertex_of(cell_outer, 0), mesh.vertex_of(cell_outer, 1),
                    mesh.vertex_of(cell_outer, 2)};
  std::vector<quad::PhysicalTrianglePoint> pts;
  switch (cls) {
    case PairClass::Identical: {
      const Vec2 c = (to[0] + to[1] + to[2]) / 3.0;
      for (int e = 0; e < 3; ++e)
        wedge_outer_nodes(c, to[e], to[(e + 1) % 3], /*grade_to_edge=*/true, opt, pts);
      return pts;
    }
    case PairClass::SharedEdge: {
      // Apex at the vertex opposite the shared edge; grade toward that edge.
      int opposite = -1;
      for (int i = 0; i < 3; ++i) {
        bool shared = false;
        for (int j = 0; j < 3; ++j)
          if (mesh.cells[cell_outer][i] == mesh.cells[cell_inner][j]) shared = true;
        if (!shared) opposite = i;
      }
      wedge_outer_nodes(to[opposite], to[(opposite + 1) % 3], to[(opposite + 2) % 3],
                        /*grade_to_edge=*/true, opt, pts);
      return pts;
    }
    case PairClass::SharedVertex: {
      int shared_local = -1;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (mesh.cells[cell_outer][i] == mesh.cells[cell_inner][j]) shared_local = i;
      wedge_outer_nodes(to[shared_local], to[(shared_local + 1) % 3],
                        to[(shared_local + 2) % 3], /*grade_to_edge=*/false, opt, pts);
      return pts;
    }
    case PairClass::Separated: {
      const double dist =
          (mesh.cell_centroid(cell_outer) - mesh.cell_centroid(cell_inner)).norm();
      const double size =
          std::max(mesh.cell_diameter(cell_outer), mesh.cell_diameter(cell_inner));
      const auto& rule = quad::cell_quadrature(
          order_for_ratio(dist / size, opt.far_order_lo, opt.far_order_hi));
      return quad::map_rule(rule, to[0], to[1], to[2]);
    }
  }
  return pts;
}

}  // namespace

PairMoments integrate_pair(const geo::ApertureMesh& mesh, int cell_outer,
                           int cell_inner, double k, const PairOptions& opt) {
  const PairClass cls = classify_pair(mesh, cell_outer, cell_inner);
  const Triangle ti{mesh.vertex_of(cell_inner, 0), mesh.vertex_of(cell_inner, 1),
                    mesh.vertex_of(cell_inner, 2)};
  PairMoments m;
  for (const auto& p : outer_nodes(mesh, cell_outer, cell_inner, cls, opt)) {
    const InnerResult in = inner_integral(ti, p.x, k, opt.inner);
    m.s += p.w * in.i0;
    m.mx += (p.w * in.i0) * p.x.cast<Complex>();
    m.my += p.w * in.i1;
    m.q += p.w * p.x.cast<Complex>() * in.i1.transpose();
  }
  return m;
}

}  // namespace aperture::singular
