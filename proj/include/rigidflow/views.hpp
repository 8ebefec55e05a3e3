#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rigidflow/backbone.hpp"
#include "rigidflow/canonicalize.hpp"
#include "rigidflow/igso3.hpp"
#include "rigidflow/rng.hpp"

namespace rigidflow {

struct PerturbConfig {
  double sigma = 0.03;   // Angstrom
  double epsilon = 0.5;
  std::uint64_t seed = 0;
};

enum class Provenance { Perturb, MD };

struct ViewPair {
  ProteinFrames g0;
  ProteinFrames g1;
  Provenance provenance = Provenance::Perturb;
  PerturbConfig perturb;  // Provenance::Perturb
  std::string source_id;  // Provenance::MD
  double s = 0.0;         // ns, start time of g0
  double delta = 0.0;     // ns
  CanonicalPose pose0;
  CanonicalPose pose1;
};

struct TrajectorySeries {
  std::vector<ProteinBackbone> snapshots;
  std::vector<double> times;  // ns, strictly increasing
};

inline constexpr double kDefaultDeltaNs = 2.0;

Vec3 perturb_translation(const Vec3& t, double sigma, Rng& rng);

// r * r_noise with r_noise ~ IG(I, eps^2) (right multiplication).
Mat3 perturb_rotation(const Mat3& r, const igso3::AngleDensityTable& table, Rng& rng);
Mat3 perturb_rotation(const Mat3& r, double epsilon, Rng& rng);

// g0 = canonicalize(frames); g1 = g0 with every residue perturbed
// independently from substream(seed, residue index). g1 is not
// re-canonicalized.
ViewPair make_phase1_pair(const ProteinFrames& frames, const PerturbConfig& config);

// Pairs of canonicalized snapshots (s, s + delta) for s on a stride grid
// starting at the first snapshot, while s + delta does not pass the last
// snapshot time. Each time is matched to the nearest
// snapshot within stride / 2; start times without a match are skipped.
std::vector<ViewPair> extract_md_pairs(const TrajectorySeries& traj, double delta,
                                       double stride, const std::string& source_id = {});

// R0 (exp(omega^) - I) p: displacement of body point p when the frame R0 is
// perturbed on the right by exp(omega^).
Vec3 rotation_displacement(const Mat3& r0, const RotationVector& omega, const Vec3& p);

}  // namespace rigidflow
