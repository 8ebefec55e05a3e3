#pragma once

// Data-parallel inner loops. Every kernel exists twice with identical
// signatures: `serial::` is the single-threaded reference, `parallel::` runs
// the same per-item body under OpenMP. Per-item randomness comes from
// substream(seed, index), so both produce bit-identical results for any
// thread count. Reductions go through pairwise_sum in index order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rigidflow/backbone.hpp"
#include "rigidflow/igso3.hpp"
#include "rigidflow/so3.hpp"

namespace rigidflow {

// Per-residue endpoints of a view pair in interpolation-ready form.
struct PairArrays {
  std::vector<Vec3> t0, t1;
  std::vector<UnitQuaternion> q0, q1;

  std::size_t size() const { return t0.size(); }
};

struct AngleAxisSample {
  double angle = 0.0;
  Vec3 axis = Vec3::UnitX();
};

// Deterministic tree reduction; the summation order depends only on size.
double pairwise_sum(std::span<const double> values);

void set_num_threads(int threads);
int num_threads();

// Residue i of perturb_frames draws t += sigma z, then r <- r * IG(I, eps^2)
// from substream(seed, i). Sample i of sample_igso3 draws axis then angle
// from substream(seed, i). Kernels that fail on one item rethrow the error
// of the lowest failing index.

namespace serial {

std::vector<RigidTransform> build_frames(std::span<const Residue> residues);
std::vector<UnitQuaternion> to_quaternions(std::span<const RigidTransform> frames);
void perturb_frames(std::span<RigidTransform> frames, double sigma,
                    const igso3::AngleDensityTable& table, std::uint64_t seed);
void interpolate(const PairArrays& pair, double tau, std::span<Vec3> t,
                 std::span<UnitQuaternion> q);
void velocities(const PairArrays& pair, double tau, std::span<Vec3> u_trans,
                std::span<Vec4> u_rot);
void squared_errors(std::span<const Vec3> pred_t, std::span<const Vec4> pred_r,
                    std::span<const Vec3> target_t, std::span<const Vec4> target_r,
                    std::span<double> err_t, std::span<double> err_r);
std::vector<AngleAxisSample> sample_igso3(const igso3::AngleDensityTable& table,
                                          std::size_t n, std::uint64_t seed);

}  // namespace serial

namespace parallel {

std::vector<RigidTransform> build_frames(std::span<const Residue> residues);
std::vector<UnitQuaternion> to_quaternions(std::span<const RigidTransform> frames);
void perturb_frames(std::span<RigidTransform> frames, double sigma,
                    const igso3::AngleDensityTable& table, std::uint64_t seed);
void interpolate(const PairArrays& pair, double tau, std::span<Vec3> t,
                 std::span<UnitQuaternion> q);
void velocities(const PairArrays& pair, double tau, std::span<Vec3> u_trans,
                std::span<Vec4> u_rot);
void squared_errors(std::span<const Vec3> pred_t, std::span<const Vec4> pred_r,
                    std::span<const Vec3> target_t, std::span<const Vec4> target_r,
                    std::span<double> err_t, std::span<double> err_r);
std::vector<AngleAxisSample> sample_igso3(const igso3::AngleDensityTable& table,
                                          std::size_t n, std::uint64_t seed);

}  // namespace parallel

}  // namespace rigidflow
