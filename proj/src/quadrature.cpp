#include "aperture/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace aperture::quad {

namespace {

GaussLegendre compute_gauss(int n) {
  GaussLegendre g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    g.x[i] = x;
    g.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return g;
}

std::mutex gauss_cache_mutex;
std::mutex triangle_cache_mutex;

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(gauss_cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

void gauss_on_interval(int n, double a, double b, std::vector<double>& x,
                       std::vector<double>& w) {
  const GaussLegendre& g = gauss_legendre(n);
  x.resize(n);
  w.resize(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    x[i] = mid + half * g.x[i];
    w[i] = half * g.w[i];
  }
}

namespace {

// Collapsed tensor-Gauss rule on the reference triangle via
// (u, v) -> (u, v (1 - u)), Jacobian (1 - u). A degree-d integrand becomes
// degree d+1 in u and d in v, so ceil((d+2)/2) x ceil((d+1)/2) Gauss points
// integrate it exactly.
TriangleRule build_triangle_rule(int order) {
  TriangleRule rule;
  rule.order = order;
  if (order == 1) {
    rule.points.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.5});
    return rule;
  }
  const int nu = (order + 3) / 2;
  const int nv = (order + 2) / 2;
  const GaussLegendre& gu = gauss_legendre(nu);
  const GaussLegendre& gv = gauss_legendre(nv);
  for (int i = 0; i < nu; ++i) {
    const double u = 0.5 * (gu.x[i] + 1.0);
    const double wu = 0.5 * gu.w[i];
    for (int j = 0; j < nv; ++j) {
      const double v = 0.5 * (gv.x[j] + 1.0) * (1.0 - u);
      const double wv = 0.5 * gv.w[j] * (1.0 - u);
      rule.points.push_back({{1.0 - u - v, u, v}, wu * wv});
    }
  }
  return rule;
}

}  // namespace

const TriangleRule& cell_quadrature(int order) {
  if (order < 1 || order > 20)
    throw std::invalid_argument("cell_quadrature: order must be in 1..20");
  static std::map<int, TriangleRule> cache;
  std::lock_guard<std::mutex> lock(triangle_cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_triangle_rule(order)).first;
  return it->second;
}

std::vector<PhysicalTrianglePoint> map_rule(const TriangleRule& rule,
                                            const Vec2& a, const Vec2& b,
                                            const Vec2& c) {
  const double jac = 2.0 * triangle_area(a, b, c);
  std::vector<PhysicalTrianglePoint> pts;
  pts.reserve(rule.points.size());
  for (const auto& p : rule.points) {
    pts.push_back({p.bary[0] * a + p.bary[1] * b + p.bary[2] * c,
                   p.weight * jac});
  }
  return pts;
}

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 u = b - a, v = c - a;
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

}  // namespace aperture::quad
