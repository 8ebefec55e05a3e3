#pragma once

// Rotation representations for rigid residues: 3x3 matrices, unit
// quaternions (w, x, y, z), and rotation vectors (axis * angle).
//
// Conventions:
//   * quaternions returned by conversions live on the w >= 0 hemisphere;
//   * slerp and slerp_derivative flip q1 when dot(q0, q1) < 0 so that the
//     interpolated path is the shortest arc;
//   * all functions are pure.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rigidflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;

// Rotation vector omega = theta * n, |omega| <= pi.
using RotationVector = Vec3;

// Velocity of a quaternion path, expressed extrinsically in R^4.
using QuaternionTangent = Vec4;

struct UnitQuaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

  Vec4 vec() const { return {w, x, y, z}; }
  UnitQuaternion operator-() const { return {-w, -x, -y, -z}; }
  bool operator==(const UnitQuaternion&) const = default;
};

inline double dot(const UnitQuaternion& a, const UnitQuaternion& b) {
  return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

namespace so3 {

inline constexpr double kExpTaylorThreshold = 1e-8;
inline constexpr double kLogPiMargin = 1e-6;
inline constexpr double kSlerpLerpThreshold = 1e-7;
inline constexpr double kAntipodalThreshold = 1e-7;

}  // namespace so3

Mat3 hat(const Vec3& v);
Vec3 vee(const Mat3& m);

// Rodrigues' formula; second-order Taylor coefficients below 1e-8 rad.
Mat3 exp_map(const RotationVector& omega);

// Inverse of exp_map on rotations with angle < pi - 1e-6.
// Throws Error(AngleAtPi) near a half-turn where the axis is not unique.
RotationVector log_map(const Mat3& r);

UnitQuaternion quat_from_matrix(const Mat3& r);
Mat3 matrix_from_quat(const UnitQuaternion& q);

UnitQuaternion normalized(const Vec4& v);

// Geodesic angle between two rotations, in [0, pi].
double rotation_angle(const Mat3& a, const Mat3& b);
double rotation_angle(const UnitQuaternion& a, const UnitQuaternion& b);

bool is_rotation(const Mat3& r, double tol = 1e-9);

Vec3 lerp(const Vec3& t0, const Vec3& t1, double tau);

// Shortest-arc geodesic between q0 and q1. Falls back to normalized LERP when
// the arc is below 1e-7 rad. Throws Error(AntipodalPair) when the two
// rotations are a half-turn apart (|dot| < 1e-7 after the hemisphere fix).
UnitQuaternion slerp(const UnitQuaternion& q0, const UnitQuaternion& q1, double tau);

// d/dtau of slerp(q0, q1, tau):
//   (-phi cos((1-tau) phi) q0 + phi cos(tau phi) q1) / sin(phi),
// with the small-arc limit q1 - q0. Its norm equals phi for every tau.
QuaternionTangent slerp_derivative(const UnitQuaternion& q0, const UnitQuaternion& q1,
                                   double tau);

// Angle between q0 and the hemisphere-fixed q1 in R^4, half the rotation
// angle between them.
double quaternion_arc(const UnitQuaternion& q0, const UnitQuaternion& q1);

}  // namespace rigidflow
