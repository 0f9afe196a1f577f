#pragma once

#include "aperture/types.hpp"

namespace aperture::greens {

// Free-space scalar kernel e^{ikR}/(4 pi R). Throws on coincident points
// (separation below 1e-8 of unit scale is treated as coincident; callers
// working on other scales pass their own floor).
Complex g_free(const Vec3& r, const Vec3& rp, double k, double r_floor = 1e-8);

// Gradient in the first argument: g * (ik - 1/R) * (r - rp)/R.
CVec3 grad_g(const Vec3& r, const Vec3& rp, double k, double r_floor = 1e-8);

// Hessian of g in the first argument,
//   g [ (3/R^2 - 3ik/R - k^2) RH RH^T + (ik/R - 1/R^2) I ],  RH = (r-rp)/R.
CMat3 hessian_g(const Vec3& r, const Vec3& rp, double k, double r_floor = 1e-8);

// Free-space dyadic (I + grad grad / k^2) g. Requires k > 0.
CMat3 dyadic_G(const Vec3& r, const Vec3& rp, double k, double r_floor = 1e-8);

// Half-space dyadic of the second kind for the upper domain,
//   G2+(r,r') = G(r,r') + diag(1,1,-1) G(rbar,r'),  rbar = (r1,r2,-r3),
// and its lower-domain mirror G2-(r,r') = G2+(rbar,r').
CMat3 dyadic_G2_plus(const Vec3& r, const Vec3& rp, double k, double r_floor = 1e-8);
CMat3 dyadic_G2_minus(const Vec3& r, const Vec3& rp, double k, double r_floor = 1e-8);

inline Vec3 reflect(const Vec3& r) { return Vec3(r.x(), r.y(), -r.z()); }

// curl_r of the free dyadic applied to a constant vector,
// curl (G(r,r') w) = grad g x w. Used for E-field recovery.
CVec3 curl_G_apply(const Vec3& r, const Vec3& rp, double k, const CVec3& w,
                   double r_floor = 1e-8);

}  // namespace aperture::greens
