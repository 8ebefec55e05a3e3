#include "rigidflow/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rigidflow/errors.hpp"

namespace rigidflow {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat3 exp_map(const RotationVector& omega) {
  const double theta = omega.norm();
  const double theta2 = theta * theta;
  double a;
  double b;
  if (theta < so3::kExpTaylorThreshold) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 k = hat(omega);
  return Mat3::Identity() + a * k + b * (k * k);
}

namespace {

// Rotation angle (atan2 of the sine and clamped cosine parts) and the
// antisymmetric part vee((R - R^T) / 2) = sin(theta) * axis.
std::pair<double, Vec3> angle_and_axis_part(const Mat3& r) {
  const Vec3 v = 0.5 * vee(r - r.transpose());
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  return {std::atan2(v.norm(), c), v};
}

}  // namespace

RotationVector log_map(const Mat3& r) {
  const auto [theta, v] = angle_and_axis_part(r);
  if (theta > std::numbers::pi - so3::kLogPiMargin) {
    throw Error(ErrorKind::AngleAtPi, "rotation angle within 1e-6 of pi");
  }
  const double s = v.norm();
  if (s == 0.0) return Vec3::Zero();
  return v * (theta / s);
}

UnitQuaternion quat_from_matrix(const Mat3& r) {
  Vec4 q;
  const double tr = r.trace();
  if (tr > 0.0) {
    const double s = 2.0 * std::sqrt(tr + 1.0);
    q << 0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q << (r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q << (r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q << (r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s;
  }
  if (q[0] < 0.0) q = -q;
  return normalized(q);
}

Mat3 matrix_from_quat(const UnitQuaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 m;
  m << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
       2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
       2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return m;
}

UnitQuaternion normalized(const Vec4& v) { return UnitQuaternion::from_vec(v / v.norm()); }

double rotation_angle(const Mat3& a, const Mat3& b) {
  return angle_and_axis_part(a.transpose() * b).first;
}

double rotation_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
  return 2.0 * quaternion_arc(a, b);
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Vec3 lerp(const Vec3& t0, const Vec3& t1, double tau) { return tau * t1 + (1.0 - tau) * t0; }

namespace {

struct Arc {
  Vec4 a;
  Vec4 b;
  double phi;
};

Arc shortest_arc(const UnitQuaternion& q0, const UnitQuaternion& q1, bool check_antipodal) {
  Arc arc{q0.vec(), q1.vec(), 0.0};
  double d = arc.a.dot(arc.b);
  if (d < 0.0) {
    arc.b = -arc.b;
    d = -d;
  }
  if (check_antipodal && d < so3::kAntipodalThreshold) {
    throw Error(ErrorKind::AntipodalPair, "rotations are a half-turn apart; geodesic not unique");
  }
  arc.phi = 2.0 * std::atan2((arc.b - arc.a).norm(), (arc.b + arc.a).norm());
  return arc;
}

}  // namespace

double quaternion_arc(const UnitQuaternion& q0, const UnitQuaternion& q1) {
  return shortest_arc(q0, q1, false).phi;
}

UnitQuaternion slerp(const UnitQuaternion& q0, const UnitQuaternion& q1, double tau) {
  const Arc arc = shortest_arc(q0, q1, true);
  if (arc.phi < so3::kSlerpLerpThreshold) {
    return normalized((1.0 - tau) * arc.a + tau * arc.b);
  }
  const double s = std::sin(arc.phi);
  const Vec4 q = (std::sin((1.0 - tau) * arc.phi) * arc.a + std::sin(tau * arc.phi) * arc.b) / s;
  return normalized(q);
}

QuaternionTangent slerp_derivative(const UnitQuaternion& q0, const UnitQuaternion& q1,
                                   double tau) {
  const Arc arc = shortest_arc(q0, q1, true);
  if (arc.phi < so3::kSlerpLerpThreshold) return arc.b - arc.a;
  const double phi = arc.phi;
  return (-phi * std::cos((1.0 - tau) * phi) * arc.a + phi * std::cos(tau * phi) * arc.b) /
         std::sin(phi);
}

}  // namespace rigidflow
