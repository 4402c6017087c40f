#pragma once

// 3-vector / 3x3-matrix helpers shared by every module. Everything here is a
// pure function over Eigen dense types; scalar type is templated so the same
// code serves double and long double (the latter used by test oracles).

#include <Eigen/Dense>
#include <cmath>

#include "rollbot/errors.hpp"

namespace rollbot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

template <typename Scalar>
using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

inline constexpr double kRotationTol = 1e-9;

// Skew-symmetric form [v], so that skew(v) * w == v.cross(w).
template <typename Derived>
Mat3T<typename Derived::Scalar> skew(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  Mat3T<S> s;
  s << S(0), -v.z(), v.y(),
       v.z(), S(0), -v.x(),
       -v.y(), v.x(), S(0);
  return s;
}

template <typename Derived>
Vec3T<typename Derived::Scalar> unskew(const Eigen::MatrixBase<Derived>& m) {
  using S = typename Derived::Scalar;
  return Vec3T<S>(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)) / S(2);
}

template <typename Scalar = double>
Mat3T<Scalar> rotation_z(Scalar angle) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(angle), s = sin(angle);
  Mat3T<Scalar> r;
  r << c, -s, Scalar(0),
       s, c, Scalar(0),
       Scalar(0), Scalar(0), Scalar(1);
  return r;
}

template <typename Scalar = double>
Mat3T<Scalar> rotation_y(Scalar angle) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(angle), s = sin(angle);
  Mat3T<Scalar> r;
  r << c, Scalar(0), s,
       Scalar(0), Scalar(1), Scalar(0),
       -s, Scalar(0), c;
  return r;
}

template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& m, double tol = kRotationTol) {
  const Mat3 mm = m.template cast<double>();
  return (mm.transpose() * mm - Mat3::Identity()).norm() < tol &&
         std::abs(mm.determinant() - 1.0) < tol;
}

// Nearest rotation matrix in the Frobenius sense (polar projection via SVD).
// Throws DegenerateInput when the matrix is rank-deficient.
inline Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) < 1e-6) {
    throw DegenerateInput("orthonormalize: rank-deficient input");
  }
  Mat3 q = svd.matrixU() * svd.matrixV().transpose();
  if (q.determinant() < 0) {
    q = svd.matrixU() * Vec3(1, 1, -1).asDiagonal() * svd.matrixV().transpose();
  }
  return q;
}

// Rodrigues formula, exact for all angles; series form near zero.
template <typename Derived>
Mat3T<typename Derived::Scalar> so3_exp(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  using std::cos;
  using std::sin;
  const S th = a.norm();
  const Mat3T<S> A = skew(a);
  if (th < S(1e-10)) {
    return Mat3T<S>::Identity() + A + A * A / S(2);
  }
  return Mat3T<S>::Identity() + sin(th) / th * A + (S(1) - cos(th)) / (th * th) * A * A;
}

// Inverse of so3_exp for rotations with angle < pi (all we ever see here:
// perturbations and step increments are small).
inline Vec3 so3_log(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double th = std::acos(c);
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (th < 1e-7) {
    return w / 2.0;  // sin th ~ th
  }
  return th / (2.0 * std::sin(th)) * w;
}

// Left Jacobian of SO(3): d/dt exp([a(t)]) = [J_l(a) adot] exp([a]).
inline Mat3 so3_left_jacobian(const Vec3& a) {
  const double th = a.norm();
  const Mat3 A = skew(a);
  if (th < 1e-6) {
    return Mat3::Identity() + A / 2.0 + A * A / 6.0;
  }
  const double t2 = th * th;
  return Mat3::Identity() + (1.0 - std::cos(th)) / t2 * A +
         (th - std::sin(th)) / (t2 * th) * A * A;
}

inline Mat3 so3_left_jacobian_inverse(const Vec3& a) {
  const double th = a.norm();
  const Mat3 A = skew(a);
  if (th < 1e-6) {
    return Mat3::Identity() - A / 2.0 + A * A / 12.0;
  }
  const double coef = 1.0 / (th * th) - (1.0 + std::cos(th)) / (2.0 * th * std::sin(th));
  return Mat3::Identity() - A / 2.0 + coef * A * A;
}

// Wraps onto (-pi, pi], matching the range of atan2.
inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace rollbot
