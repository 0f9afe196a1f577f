#pragma once

#include <array>
#include <vector>

#include "aperture/types.hpp"

namespace aperture::quad {

struct GaussLegendre {
  std::vector<double> x;  // nodes on (-1, 1)
  std::vector<double> w;
};

// n-point Gauss-Legendre rule, nodes by Newton iteration on P_n.
const GaussLegendre& gauss_legendre(int n);

// Nodes/weights mapped to (a, b).
void gauss_on_interval(int n, double a, double b, std::vector<double>& x,
                       std::vector<double>& w);

struct TrianglePoint {
  std::array<double, 3> bary;  // barycentric coordinates, sum to 1
  double weight;               // reference weights sum to 1/2
};

// Quadrature on the reference triangle {(u,v): u,v >= 0, u+v <= 1},
// exact for all polynomials of total degree <= order.
struct TriangleRule {
  int order = 0;
  std::vector<TrianglePoint> points;
};

// order 1 is the centroid rule; higher orders use a collapsed
// tensor Gauss construction (positive weights at all orders).
// Supported range is 1..20.
const TriangleRule& cell_quadrature(int order);

struct PhysicalTrianglePoint {
  Vec2 x;
  double w;  // includes the Jacobian (2*area)
};

// Maps a reference rule onto the triangle (a, b, c).
std::vector<PhysicalTrianglePoint> map_rule(const TriangleRule& rule,
                                            const Vec2& a, const Vec2& b,
                                            const Vec2& c);

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace aperture::quad
