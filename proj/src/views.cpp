#include "rigidflow/views.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "rigidflow/errors.hpp"
#include "rigidflow/kernels.hpp"

namespace rigidflow {

Vec3 perturb_translation(const Vec3& t, double sigma, Rng& rng) {
  Vec3 z;
  z.x() = standard_normal(rng);
  z.y() = standard_normal(rng);
  z.z() = standard_normal(rng);
  return t + sigma * z;
}

Mat3 perturb_rotation(const Mat3& r, const igso3::AngleDensityTable& table, Rng& rng) {
  return r * igso3::sample_rotation(Mat3::Identity(), table, rng);
}

Mat3 perturb_rotation(const Mat3& r, double epsilon, Rng& rng) {
  return perturb_rotation(r, igso3::cached_table(epsilon), rng);
}

ViewPair make_phase1_pair(const ProteinFrames& frames, const PerturbConfig& config) {
  if (!(config.sigma >= 0.0) || !(config.epsilon > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "perturbation needs sigma >= 0 and epsilon > 0");
  }
  ViewPair pair;
  pair.provenance = Provenance::Perturb;
  pair.perturb = config;
  CanonicalFrames canonical = canonicalize(frames);
  pair.g0 = std::move(canonical.frames);
  pair.pose0 = canonical.pose;
  pair.pose1 = canonical.pose;
  pair.g1 = pair.g0;
  parallel::perturb_frames(pair.g1.frames, config.sigma, igso3::cached_table(config.epsilon),
                           config.seed);
  return pair;
}

namespace {

std::optional<std::size_t> nearest_snapshot(const std::vector<double>& times, double target,
                                            double tolerance) {
  const auto it = std::lower_bound(times.begin(), times.end(), target);
  std::optional<std::size_t> best;
  double best_gap = tolerance;
  auto consider = [&](std::vector<double>::const_iterator c) {
    if (c < times.begin() || c >= times.end()) return;
    const double gap = std::abs(*c - target);
    if (gap <= best_gap) {
      if (!best || gap < best_gap) {
        best = static_cast<std::size_t>(c - times.begin());
        best_gap = gap;
      }
    }
  };
  if (it != times.begin()) consider(it - 1);
  consider(it);
  return best;
}

}  // namespace

std::vector<ViewPair> extract_md_pairs(const TrajectorySeries& traj, double delta,
                                       double stride, const std::string& source_id) {
  if (!(delta > 0.0) || !(stride > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "delta and stride must be positive");
  }
  if (traj.snapshots.size() != traj.times.size()) {
    throw Error(ErrorKind::InvalidArgument, "snapshot and time counts differ");
  }
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    if (!(traj.times[i] > traj.times[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "trajectory times must be strictly increasing");
    }
  }
  const double span = traj.times.empty() ? 0.0 : traj.times.back() - traj.times.front();
  if (traj.times.empty() || span < delta) {
    throw Error(ErrorKind::TrajectoryTooShort,
                fmt::format("trajectory spans {} ns, shorter than delta = {} ns", span, delta));
  }
  const std::size_t residues = traj.snapshots.front().size();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    if (traj.snapshots[i].size() != residues) {
      throw Error(ErrorKind::ResidueMismatch,
                  fmt::format("snapshot {} has {} residues, expected {}", i,
                              traj.snapshots[i].size(), residues));
    }
  }

  const double tolerance = 0.5 * stride;
  const double first = traj.times.front();
  const double last = traj.times.back();
  // Starts (and their partners) are matched up front so the pair list does
  // not depend on how the per-pair work is scheduled.
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::vector<double> starts;
  for (std::size_t k = 0;; ++k) {
    const double s = first + static_cast<double>(k) * stride;
    if (s + delta > last + 1e-9 * std::max(1.0, std::abs(last))) break;
    const auto i0 = nearest_snapshot(traj.times, s, tolerance);
    const auto i1 = nearest_snapshot(traj.times, s + delta, tolerance);
    if (i0 && i1 && *i1 > *i0) {
      matches.emplace_back(*i0, *i1);
      starts.push_back(s);
    }
  }

  std::vector<ViewPair> pairs(matches.size());
  std::vector<std::exception_ptr> errors(matches.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(matches.size()); ++k) {
    try {
      const auto [i0, i1] = matches[static_cast<std::size_t>(k)];
      auto& pair = pairs[static_cast<std::size_t>(k)];
      CanonicalFrames c0 = canonicalize(frames_from_backbone(traj.snapshots[i0]));
      CanonicalFrames c1 = canonicalize(frames_from_backbone(traj.snapshots[i1]));
      pair.provenance = Provenance::MD;
      pair.source_id = source_id;
      pair.s = starts[static_cast<std::size_t>(k)];
      pair.delta = delta;
      pair.g0 = std::move(c0.frames);
      pair.g1 = std::move(c1.frames);
      pair.pose0 = c0.pose;
      pair.pose1 = c1.pose;
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return pairs;
}

Vec3 rotation_displacement(const Mat3& r0, const RotationVector& omega, const Vec3& p) {
  return r0 * ((exp_map(omega) - Mat3::Identity()) * p);
}

}  // namespace rigidflow
