#pragma once

#include <span>
#include <vector>

#include "rigidflow/backbone.hpp"
#include "rigidflow/so3.hpp"

namespace rigidflow {

// Pose of a structure relative to its inertial frame: x' = axes^T (x - centroid).
struct CanonicalPose {
  Vec3 centroid = Vec3::Zero();
  Mat3 axes = Mat3::Identity();
  Vec3 moments = Vec3::Zero();  // ascending
};

struct PrincipalAxes {
  Mat3 axes = Mat3::Identity();
  Vec3 moments = Vec3::Zero();
};

struct CanonicalFrames {
  ProteinFrames frames;
  CanonicalPose pose;
};

inline constexpr double kDegenerateInertiaGap = 1e-8;

// Unweighted mean of the CA positions.
Vec3 center_of_mass(const ProteinFrames& frames);

// sum_i (|x_i|^2 I - x_i x_i^T) over already-centered points.
Mat3 inertia_tensor(std::span<const Vec3> centered);

// Eigenvectors of a symmetric inertia tensor as columns, sorted by ascending
// eigenvalue. Each of the first two columns is negated when its
// largest-magnitude component is negative (lowest index wins ties) and the
// third column is e1 x e2, so det = +1.
// Throws Error(DegenerateInertia) if two eigenvalues are closer than 1e-8
// relative to the largest one.
PrincipalAxes principal_axes(const Mat3& inertia);

// Re-signs the first two principal axes so that the third moment of the
// points projected on each is positive (falling back to the first point with
// a nonzero projection), then sets the third axis to e1 x e2. Depends only on
// the point cloud, so the result rotates with the body.
Mat3 orient_axes(const Mat3& axes, std::span<const Vec3> centered);

// t' = V^T (t - centroid), r' = V^T r.
CanonicalFrames canonicalize(const ProteinFrames& frames);

ProteinFrames apply_pose(const ProteinFrames& frames, const CanonicalPose& pose);
ProteinFrames undo_pose(const ProteinFrames& canonical, const CanonicalPose& pose);

}  // namespace rigidflow
