#include "rigidflow/canonicalize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "rigidflow/errors.hpp"

namespace rigidflow {

namespace {

std::vector<Vec3> centered_positions(const ProteinFrames& frames, const Vec3& centroid) {
  std::vector<Vec3> out;
  out.reserve(frames.size());
  for (const auto& f : frames.frames) out.push_back(f.t - centroid);
  return out;
}

Vec3 sign_by_largest_component(const Vec3& v) {
  int best = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(v[k]) > std::abs(v[best])) best = k;
  }
  return v[best] < 0.0 ? Vec3(-v) : v;
}

// +1 or -1 so that the projected cloud leans towards the positive axis.
double orientation_sign(const Vec3& axis, std::span<const Vec3> points) {
  double skew = 0.0;
  double scale = 0.0;
  for (const auto& p : points) {
    const double s = axis.dot(p);
    skew += s * s * s;
    scale += std::abs(s * s * s);
  }
  if (std::abs(skew) > 1e-9 * scale) return skew < 0.0 ? -1.0 : 1.0;
  for (const auto& p : points) {
    const double s = axis.dot(p);
    if (std::abs(s) > 1e-9 * std::sqrt(p.squaredNorm() + 1.0)) return s < 0.0 ? -1.0 : 1.0;
  }
  return 1.0;
}

}  // namespace

Vec3 center_of_mass(const ProteinFrames& frames) {
  if (frames.size() == 0) {
    throw Error(ErrorKind::InvalidArgument, "center of mass of an empty structure");
  }
  Vec3 sum = Vec3::Zero();
  for (const auto& f : frames.frames) sum += f.t;
  return sum / static_cast<double>(frames.size());
}

Mat3 inertia_tensor(std::span<const Vec3> centered) {
  Mat3 inertia = Mat3::Zero();
  for (const auto& x : centered) {
    inertia += x.squaredNorm() * Mat3::Identity() - x * x.transpose();
  }
  return 0.5 * (inertia + inertia.transpose());
}

PrincipalAxes principal_axes(const Mat3& inertia) {
  const Mat3 sym = 0.5 * (inertia + inertia.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::DegenerateInertia, "eigendecomposition failed");
  }
  const Vec3 values = solver.eigenvalues();
  const Mat3 vectors = solver.eigenvectors();

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });

  PrincipalAxes out;
  for (int k = 0; k < 3; ++k) {
    out.moments[k] = values[order[k]];
    out.axes.col(k) = vectors.col(order[k]);
  }
  const double scale = std::max(out.moments.cwiseAbs().maxCoeff(), 1e-300);
  for (int k = 0; k < 2; ++k) {
    if ((out.moments[k + 1] - out.moments[k]) / scale < kDegenerateInertiaGap) {
      throw Error(ErrorKind::DegenerateInertia,
                  "principal moments are not distinct; axes are not unique");
    }
  }
  // Ordering fixed; now the per-axis signs and handedness (diag(1, 1, det)).
  out.axes.col(0) = sign_by_largest_component(out.axes.col(0));
  out.axes.col(1) = sign_by_largest_component(out.axes.col(1));
  out.axes.col(2) = out.axes.col(0).cross(out.axes.col(1));
  return out;
}

Mat3 orient_axes(const Mat3& axes, std::span<const Vec3> centered) {
  Mat3 out = axes;
  for (int k = 0; k < 2; ++k) {
    out.col(k) *= orientation_sign(axes.col(k), centered);
  }
  out.col(2) = out.col(0).cross(out.col(1));
  return out;
}

CanonicalFrames canonicalize(const ProteinFrames& frames) {
  if (frames.size() < 3) {
    throw Error(ErrorKind::DegenerateInertia, "canonicalization needs at least 3 residues");
  }
  CanonicalFrames out;
  out.pose.centroid = center_of_mass(frames);
  const auto centered = centered_positions(frames, out.pose.centroid);
  const PrincipalAxes principal = principal_axes(inertia_tensor(centered));
  out.pose.axes = orient_axes(principal.axes, centered);
  out.pose.moments = principal.moments;
  out.frames = apply_pose(frames, out.pose);
  return out;
}

ProteinFrames apply_pose(const ProteinFrames& frames, const CanonicalPose& pose) {
  ProteinFrames out;
  out.aa = frames.aa;
  out.frames.reserve(frames.size());
  const Mat3 vt = pose.axes.transpose();
  for (const auto& f : frames.frames) {
    out.frames.push_back({vt * (f.t - pose.centroid), vt * f.r});
  }
  return out;
}

ProteinFrames undo_pose(const ProteinFrames& canonical, const CanonicalPose& pose) {
  ProteinFrames out;
  out.aa = canonical.aa;
  out.frames.reserve(canonical.size());
  for (const auto& f : canonical.frames) {
    out.frames.push_back({pose.axes * f.t + pose.centroid, pose.axes * f.r});
  }
  return out;
}

}  // namespace rigidflow
