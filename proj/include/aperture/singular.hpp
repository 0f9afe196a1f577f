#pragma once

#include <array>

#include "aperture/geometry.hpp"
#include "aperture/quadrature.hpp"
#include "aperture/types.hpp"

namespace aperture::singular {

using Triangle = std::array<Vec2, 3>;

// Closed forms for the in-plane static kernel 1/(4 pi |x-y|).
// Valid for x anywhere in the plane (inside or outside the triangle);
// edge terms use the cancellation-free form of l + R when l < 0.

// int_T 1/(4 pi |x-y|) dA(y)
double static_potential(const Triangle& t, const Vec2& x);

// grad_x of static_potential
Vec2 static_potential_grad(const Triangle& t, const Vec2& x);

// int_T (y - x)/(4 pi |x-y|) dA(y)
Vec2 static_moment(const Triangle& t, const Vec2& x);

// Dynamic remainder (e^{ikR} - 1)/(4 pi R): bounded, series near kR -> 0.
Complex remainder_kernel(double R, double k);
// grad_x of the remainder: (x-y) (ikR e^{ikR} - e^{ikR} + 1)/(4 pi R^3).
CVec2 remainder_kernel_grad(const Vec2& x, const Vec2& y, double k);

// Quadrature points for int_T f dy concentrated at `apex` (a point of the
// closed triangle): the triangle is split into wedges at the apex, each
// mapped from the unit square so integrands smooth along rays from the apex
// are resolved exactly.
std::vector<quad::PhysicalTrianglePoint> duffy_points(const Triangle& t,
                                                      const Vec2& apex, int n);

struct InnerOptions {
  double near_ratio = 1.5;  // closed-form path when dist < near_ratio * diam
  int duffy_n = 5;
  int far_order_lo = 3;
  int far_order_hi = 8;
};

struct InnerResult {
  Complex i0{0, 0};  // int g0 dy
  CVec2 i1{CVec2::Zero()};  // int g0 y dy
};

// int_T g0(x, y) (1, y) dA(y) for arbitrary in-plane x.
InnerResult inner_integral(const Triangle& t, const Vec2& x, double k,
                           const InnerOptions& opt = {});

// Tangential gradient of the single-layer value: grad_x int_T g0(x,y) dA(y),
// x strictly off the closed triangle or inside a cell; uses closed form +
// remainder quadrature on the near path.
CVec2 inner_gradient(const Triangle& t, const Vec2& x, double k,
                     const InnerOptions& opt = {});

enum class PairClass { Identical, SharedEdge, SharedVertex, Separated };

PairClass classify_pair(const geo::ApertureMesh& mesh, int cell_a, int cell_b);

struct PairOptions {
  InnerOptions inner;
  // Outer scheme for touching pairs: composite Gauss panels graded
  // geometrically toward the shared feature.
  int graded_levels = 12;
  double graded_ratio = 0.5;
  int n_s = 4;
  int n_t = 5;
  // Separated pairs: outer order by distance-to-size ratio.
  int far_order_lo = 3;
  int far_order_hi = 8;

  static PairOptions quality();  // slower settings for oracle-grade accuracy
};

// Double-integral moments over a cell pair,
//   s  = int_{K} int_{L} g0(x,y) dy dx
//   mx = int int g0 x dy dx,  my = int int g0 y dy dx,
//   q(a,b) = int int g0 x_a y_b dy dx,
// with x on the outer (test) cell K and y on the inner (trial) cell L.
struct PairMoments {
  Complex s{0, 0};
  CVec2 mx{CVec2::Zero()};
  CVec2 my{CVec2::Zero()};
  Eigen::Matrix2cd q{Eigen::Matrix2cd::Zero()};

  PairMoments mirrored() const {  // swap the roles of x and y
    PairMoments m;
    m.s = s;
    m.mx = my;
    m.my = mx;
    m.q = q.transpose();
    return m;
  }
};

PairMoments integrate_pair(const geo::ApertureMesh& mesh, int cell_outer,
                           int cell_inner, double k, const PairOptions& opt = {});

}  // namespace aperture::singular
