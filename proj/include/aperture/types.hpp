#pragma once

#include <complex>

#include <Eigen/Dense>

namespace aperture {

using Complex = std::complex<double>;

using Vec2  = Eigen::Vector2d;
using Vec3  = Eigen::Vector3d;
using CVec2 = Eigen::Vector2cd;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;
using VecX  = Eigen::VectorXd;
using MatX  = Eigen::MatrixXd;
using CVecX = Eigen::VectorXcd;
using CMatX = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Rotation by +90 degrees in the plane: (a,b) -> (-b,a).
inline Vec2 rot90(const Vec2& v) { return Vec2(-v.y(), v.x()); }
inline CVec2 rot90(const CVec2& v) { return CVec2(-v.y(), v.x()); }

}  // namespace aperture
