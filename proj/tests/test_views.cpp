#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "rigidflow/errors.hpp"
#include "rigidflow/kernels.hpp"
#include "rigidflow/views.hpp"
#include "stats.hpp"

using namespace rigidflow;
using rigidflow::testing::random_backbone;
using rigidflow::testing::random_frames;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TrajectorySeries regular_trajectory(std::size_t frames, double dt, std::size_t residues = 12) {
  TrajectorySeries traj;
  const ProteinBackbone base = random_backbone(residues, 5);
  for (std::size_t k = 0; k < frames; ++k) {
    ProteinBackbone snap = base;
    const Vec3 drift(0.1 * k, 0.0, 0.0);
    for (auto& r : snap.residues) {
      r.n += drift;
      r.ca += drift;
      r.c += drift;
    }
    traj.snapshots.push_back(snap);
    traj.times.push_back(dt * static_cast<double>(k));
  }
  return traj;
}

ErrorKind md_error(const TrajectorySeries& traj, double delta, double stride) {
  try {
    extract_md_pairs(traj, delta, stride);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("translation noise") {
  Rng rng = substream(51, 0);
  const Vec3 t(1.0, -2.0, 3.0);
  CHECK(perturb_translation(t, 0.0, rng) == t);

  std::vector<double> dx[3];
  for (int k = 0; k < 100000; ++k) {
    const Vec3 d = perturb_translation(t, 0.03, rng) - t;
    for (int c = 0; c < 3; ++c) dx[c].push_back(d[c]);
  }
  for (auto& v : dx) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    CHECK(std::abs(std::sqrt(var / (v.size() - 1)) - 0.03) < 0.02 * 0.03);
  }
  Rng a = substream(52, 3);
  Rng b = substream(52, 3);
  CHECK(perturb_translation(t, 0.03, a) == perturb_translation(t, 0.03, b));
}

TEST_CASE("rotation noise") {
  SUBCASE("concentrated") {
    igso3::Params p;
    p.epsilon = 1e-3;
    const auto table = igso3::build_table(p);
    Rng rng = substream(53, 0);
    const Mat3 r = exp_map(Vec3(0.4, 0.1, -2.0));
    int close = 0;
    for (int k = 0; k < 10000; ++k) {
      const Mat3 out = perturb_rotation(r, table, rng);
      REQUIRE(is_rotation(out));
      close += rotation_angle(r, out) < 0.1;
    }
    CHECK(close >= 9900);
  }
  SUBCASE("right multiplication") {
    const Mat3 r = exp_map(Vec3(0.4, 0.1, -2.0));
    Rng a = substream(54, 0);
    Rng b = substream(54, 0);
    const Mat3 noise = igso3::sample_rotation(Mat3::Identity(), igso3::cached_table(0.5), b);
    CHECK((perturb_rotation(r, 0.5, a) - r * noise).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("angle histogram at eps = 0.5") {
    const auto& table = igso3::cached_table(0.5);
    Rng rng = substream(55, 0);
    const Mat3 r = exp_map(Vec3(1.0, 1.0, 0.0));
    std::vector<double> angles;
    for (int k = 0; k < 100000; ++k) angles.push_back(rotation_angle(r, perturb_rotation(r, table, rng)));
    const auto density = [](double x) { return igso3::angle_pdf_series(x, 0.5); };
    const double total = rigidflow::testing::simpson(density, 0.0, M_PI, 20000);
    std::vector<double> edges{0.0};
    for (int b = 1; b < 64; ++b) edges.push_back(igso3::sample_angle(table, b / 64.0));
    edges.push_back(M_PI);
    std::vector<double> probs;
    for (int b = 0; b < 64; ++b) {
      probs.push_back(rigidflow::testing::simpson(density, edges[b], edges[b + 1], 200) / total);
    }
    CHECK(rigidflow::testing::chi_square(angles, edges, probs).p_value > 0.01);
  }
}

TEST_CASE("phase I pairs") {
  const ProteinFrames frames = random_frames(40, 2);
  const PerturbConfig config{0.03, 0.5, 7};
  const ViewPair pair = make_phase1_pair(frames, config);
  CHECK(pair.provenance == Provenance::Perturb);
  CHECK(pair.g0.size() == 40);
  CHECK(pair.g1.size() == 40);
  CHECK(center_of_mass(pair.g0).norm() < 1e-9);
  const CanonicalFrames c = canonicalize(frames);
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(pair.g0.frames[i].t == c.frames.frames[i].t);
    CHECK(is_rotation(pair.g1.frames[i].r));
  }

  SUBCASE("factorizes into per-residue translation then rotation") {
    for (std::size_t i = 0; i < 40; ++i) {
      Rng rng = substream(7, i);
      const Vec3 t = perturb_translation(pair.g0.frames[i].t, 0.03, rng);
      const Mat3 r = perturb_rotation(pair.g0.frames[i].r, igso3::cached_table(0.5), rng);
      CHECK(t == pair.g1.frames[i].t);
      CHECK(r == pair.g1.frames[i].r);
    }
  }
  SUBCASE("deterministic") {
    const ViewPair again = make_phase1_pair(frames, config);
    for (std::size_t i = 0; i < 40; ++i) {
      CHECK(again.g1.frames[i].t == pair.g1.frames[i].t);
      CHECK(again.g1.frames[i].r == pair.g1.frames[i].r);
    }
  }
  SUBCASE("no-noise limit") {
    const ViewPair quiet = make_phase1_pair(frames, {0.0, 1e-9, 3});
    double worst_t = 0.0;
    double worst_r = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      worst_t = std::max(worst_t, (quiet.g1.frames[i].t - quiet.g0.frames[i].t).norm());
      worst_r = std::max(worst_r, rotation_angle(quiet.g0.frames[i].r, quiet.g1.frames[i].r));
    }
    CHECK(worst_t == 0.0);
    CHECK(worst_r < 1e-3);
  }
  SUBCASE("invalid configuration") {
    CHECK_THROWS_AS(make_phase1_pair(frames, {-1.0, 0.5, 0}), Error);
    CHECK_THROWS_AS(make_phase1_pair(frames, {0.03, 0.0, 0}), Error);
  }
}

TEST_CASE("per-residue noise is independent") {
  const ProteinFrames frames = random_frames(100, 8);
  std::vector<double> a;
  std::vector<double> b;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const ViewPair pair = make_phase1_pair(frames, {0.03, 0.5, seed});
    a.push_back((pair.g1.frames[10].t - pair.g0.frames[10].t).norm());
    b.push_back((pair.g1.frames[11].t - pair.g0.frames[11].t).norm());
  }
  CHECK(std::abs(correlation(a, b)) < 0.05);
}

TEST_CASE("perturbation breaks rigid distances") {
  const ProteinFrames frames = random_frames(20, 9);
  int changed = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ViewPair pair = make_phase1_pair(frames, {0.03, 0.5, seed});
    bool differs = false;
    for (std::size_t i = 0; i + 1 < 20; ++i) {
      const double d0 = (pair.g0.frames[i].t - pair.g0.frames[i + 1].t).norm();
      const double d1 = (pair.g1.frames[i].t - pair.g1.frames[i + 1].t).norm();
      differs = differs || d0 != d1;
    }
    changed += differs;
  }
  CHECK(changed == 100);
}

TEST_CASE("MD pairs") {
  const TrajectorySeries traj = regular_trajectory(100, 1.0);
  const auto pairs = extract_md_pairs(traj, 2.0, 1.0, "traj");
  REQUIRE(pairs.size() == 98);
  CHECK(pairs.front().s == 0.0);
  CHECK(pairs.back().s == 97.0);
  for (const auto& p : pairs) {
    CHECK(p.provenance == Provenance::MD);
    CHECK(p.source_id == "traj");
    CHECK(p.delta == 2.0);
    CHECK(center_of_mass(p.g0).norm() < 1e-6);
    CHECK(center_of_mass(p.g1).norm() < 1e-6);
  }
  // Rigid drift only: both views canonicalize to the same frames.
  CHECK((pairs[5].g0.frames[3].t - pairs[5].g1.frames[3].t).norm() < 1e-9);

  CHECK(extract_md_pairs(traj, 2.0, 2.0).size() == 49);
  CHECK(extract_md_pairs(traj, kDefaultDeltaNs, kDefaultDeltaNs).size() == 49);

  SUBCASE("irregular sampling uses the nearest snapshot") {
    TrajectorySeries jittered = traj;
    for (std::size_t k = 1; k < jittered.times.size(); ++k) jittered.times[k] += 0.2 * ((k % 3) - 1.0);
    const auto p = extract_md_pairs(jittered, 2.0, 1.0);
    CHECK(p.size() >= 97);
  }
  SUBCASE("gaps skip start times without a match") {
    TrajectorySeries gappy;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      if (k >= 40 && k < 50) continue;
      gappy.snapshots.push_back(traj.snapshots[k]);
      gappy.times.push_back(traj.times[k]);
    }
    CHECK(extract_md_pairs(gappy, 2.0, 1.0).size() == 98 - 12);
  }
  SUBCASE("errors") {
    CHECK(md_error(regular_trajectory(3, 0.5), 2.0, 1.0) == ErrorKind::TrajectoryTooShort);
    CHECK(md_error(TrajectorySeries{}, 2.0, 1.0) == ErrorKind::TrajectoryTooShort);
    TrajectorySeries mismatch = traj;
    mismatch.snapshots[7].residues.pop_back();
    CHECK(md_error(mismatch, 2.0, 1.0) == ErrorKind::ResidueMismatch);
    CHECK(md_error(traj, 0.0, 1.0) == ErrorKind::InvalidArgument);
    TrajectorySeries unordered = traj;
    std::swap(unordered.times[3], unordered.times[4]);
    CHECK(md_error(unordered, 2.0, 1.0) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("displacement under a rotation perturbation depends on the base rotation") {
  const Vec3 p(1.0, 0.0, 0.0);
  const double theta = M_PI / 2;
  const Mat3 ra = Mat3::Identity();
  const Mat3 rb = exp_map(Vec3(0.0, M_PI / 2, 0.0));
  // The same spatial rotation (about z) expressed in each body frame.
  const Vec3 wa = theta * (ra.transpose() * Vec3::UnitZ());
  const Vec3 wb = theta * (rb.transpose() * Vec3::UnitZ());
  const double da = rotation_displacement(ra, wa, p).norm();
  const double db = rotation_displacement(rb, wb, p).norm();
  CHECK(da == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(db < 1e-12);
  CHECK(std::abs(da - db) > 0.1 * p.norm());
}
