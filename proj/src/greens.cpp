#include "aperture/greens.hpp"

#include <cmath>
#include <stdexcept>

namespace aperture::greens {

namespace {

double checked_distance(const Vec3& r, const Vec3& rp, double r_floor) {
  const double R = (r - rp).norm();
  if (R <= r_floor)
    throw std::domain_error("greens: evaluation at (near-)coincident points");
  return R;
}

}  // namespace

Complex g_free(const Vec3& r, const Vec3& rp, double k, double r_floor) {
  const double R = checked_distance(r, rp, r_floor);
  return std::exp(kI * k * R) / (4.0 * kPi * R);
}

CVec3 grad_g(const Vec3& r, const Vec3& rp, double k, double r_floor) {
  const double R = checked_distance(r, rp, r_floor);
  const Complex g = std::exp(kI * k * R) / (4.0 * kPi * R);
  const Complex f = g * (kI * k - 1.0 / R) / R;
  return f * (r - rp).cast<Complex>();
}

CMat3 hessian_g(const Vec3& r, const Vec3& rp, double k, double r_floor) {
  const double R = checked_distance(r, rp, r_floor);
  const Complex g = std::exp(kI * k * R) / (4.0 * kPi * R);
  const Vec3 rh = (r - rp) / R;
  const Complex c_rr = g * (3.0 / (R * R) - 3.0 * kI * k / R - k * k);
  const Complex c_id = g * (kI * k / R - 1.0 / (R * R));
  CMat3 H = c_rr * (rh * rh.transpose()).cast<Complex>();
  H += c_id * CMat3::Identity();
  return H;
}

CMat3 dyadic_G(const Vec3& r, const Vec3& rp, double k, double r_floor) {
  if (!(k > 0)) throw std::invalid_argument("dyadic_G requires k > 0");
  CMat3 G = hessian_g(r, rp, k, r_floor) / (k * k);
  G += g_free(r, rp, k, r_floor) * CMat3::Identity();
  return G;
}

CMat3 dyadic_G2_plus(const Vec3& r, const Vec3& rp, double k, double r_floor) {
  static const Eigen::Matrix3d D = Eigen::Vector3d(1, 1, -1).asDiagonal();
  return dyadic_G(r, rp, k, r_floor) +
         D.cast<Complex>() * dyadic_G(reflect(r), rp, k, r_floor);
}

CMat3 dyadic_G2_minus(const Vec3& r, const Vec3& rp, double k, double r_floor) {
  return dyadic_G2_plus(reflect(r), rp, k, r_floor);
}

CVec3 curl_G_apply(const Vec3& r, const Vec3& rp, double k, const CVec3& w,
                   double r_floor) {
  const CVec3 dg = grad_g(r, rp, k, r_floor);
  return dg.cross(w);
}

}  // namespace aperture::greens
