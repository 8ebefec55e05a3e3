#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "rigidflow/canonicalize.hpp"
#include "rigidflow/errors.hpp"

using namespace rigidflow;
using rigidflow::testing::fixture_corpus;
using rigidflow::testing::random_frames;
using rigidflow::testing::random_rotation;
using rigidflow::testing::random_vector;
using rigidflow::testing::transformed;

namespace {

std::vector<Vec3> positions(const ProteinFrames& frames) {
  std::vector<Vec3> out;
  for (const auto& f : frames.frames) out.push_back(f.t);
  return out;
}

double frame_deviation(const ProteinFrames& a, const ProteinFrames& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, (a.frames[i].t - b.frames[i].t).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.frames[i].r - b.frames[i].r).cwiseAbs().maxCoeff());
  }
  return worst;
}

ProteinFrames frames_at(const std::vector<Vec3>& points) {
  ProteinFrames f;
  for (const auto& p : points) {
    f.frames.push_back({p, Mat3::Identity()});
    f.aa.push_back(1);
  }
  return f;
}

}  // namespace

TEST_CASE("center of mass") {
  CHECK(center_of_mass(frames_at({Vec3(0, 0, 0), Vec3(2, 0, 0)})) == Vec3(1, 0, 0));
  const ProteinFrames frames = random_frames(37, 4);
  Vec3 naive = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (const auto& f : frames.frames) s += f.t[k];
    naive[k] = s / 37.0;
  }
  CHECK((center_of_mass(frames) - naive).norm() < 1e-12);
  CHECK(center_of_mass(canonicalize(frames).frames).norm() < 1e-12);
  CHECK_THROWS_AS(center_of_mass(ProteinFrames{}), Error);
}

TEST_CASE("inertia tensor") {
  const std::vector<Vec3> rod{Vec3(1, 0, 0), Vec3(-1, 0, 0)};
  CHECK(inertia_tensor(rod) == Vec3(0, 2, 2).asDiagonal().toDenseMatrix());
  const std::vector<Vec3> origin{Vec3::Zero()};
  CHECK(inertia_tensor(origin) == Mat3::Zero());

  Rng rng = substream(41, 0);
  std::vector<Vec3> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(random_vector(rng, 3.0));
  Mat3 brute = Mat3::Zero();
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (const auto& x : pts) brute(a, b) += (a == b ? x.squaredNorm() : 0.0) - x[a] * x[b];
    }
  }
  const Mat3 inertia = inertia_tensor(pts);
  CHECK((inertia - brute).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((inertia - inertia.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(inertia);
  CHECK(solver.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("principal axes") {
  const PrincipalAxes diag = principal_axes(Vec3(1, 2, 3).asDiagonal());
  CHECK((diag.axes - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((diag.moments - Vec3(1, 2, 3)).norm() < 1e-14);

  const PrincipalAxes rev = principal_axes(Vec3(3, 2, 1).asDiagonal());
  CHECK((rev.moments - Vec3(1, 2, 3)).norm() < 1e-14);
  CHECK(rev.axes.determinant() == doctest::Approx(1.0));
  CHECK((rev.axes.cwiseAbs() - Mat3(Eigen::PermutationMatrix<3>(Eigen::Vector3i(2, 1, 0))))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK(rev.axes(2, 0) == 1.0);
  CHECK(rev.axes(1, 1) == 1.0);

  Rng rng = substream(42, 0);
  for (int k = 0; k < 100; ++k) {
    const Mat3 q = random_rotation(rng);
    const Vec3 lambda(1.0 + uniform01(rng), 3.0 + uniform01(rng), 5.0 + uniform01(rng));
    const Mat3 spd = q * lambda.asDiagonal() * q.transpose();
    const PrincipalAxes p = principal_axes(spd);
    CHECK((p.axes * p.moments.asDiagonal() * p.axes.transpose() - spd).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK(is_rotation(p.axes));
    CHECK(p.moments[0] <= p.moments[1]);
    CHECK(p.moments[1] <= p.moments[2]);
    for (int c = 0; c < 2; ++c) {
      const Vec3 col = p.axes.col(c);
      int best = 0;
      for (int j = 1; j < 3; ++j) {
        if (std::abs(col[j]) > std::abs(col[best])) best = j;
      }
      CHECK(col[best] > 0.0);
    }
  }
}

TEST_CASE("degenerate inertia") {
  const auto expect_degenerate = [](const auto& fn) {
    try {
      fn();
      FAIL("expected DegenerateInertia");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateInertia);
    }
  };
  expect_degenerate([] { principal_axes(Vec3(1, 1, 2).asDiagonal()); });
  expect_degenerate([] { principal_axes(Vec3(1, 2, 2 + 1e-9).asDiagonal()); });
  CHECK_NOTHROW(principal_axes(Vec3(1, 2, 2 + 1e-6).asDiagonal()));
  // Regular tetrahedron: all moments equal.
  expect_degenerate([] {
    canonicalize(frames_at({Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)}));
  });
  expect_degenerate([] { canonicalize(frames_at({Vec3(0, 0, 0), Vec3(1, 0, 0)})); });
}

TEST_CASE("canonical frames") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ProteinFrames frames = random_frames(50, seed);
    const CanonicalFrames c = canonicalize(frames);
    CHECK(center_of_mass(c.frames).norm() < 1e-9);
    const Mat3 inertia = inertia_tensor(positions(c.frames));
    Mat3 off = inertia;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() < 1e-6 * inertia.trace());
    CHECK(inertia(0, 0) <= inertia(1, 1));
    CHECK(inertia(1, 1) <= inertia(2, 2));
    CHECK(is_rotation(c.pose.axes));
    CHECK(c.frames.aa == frames.aa);

    CHECK(frame_deviation(canonicalize(c.frames).frames, c.frames) < 1e-9);
    CHECK(frame_deviation(undo_pose(c.frames, c.pose), frames) < 1e-12);

    for (std::size_t i = 0; i < frames.size(); i += 7) {
      for (std::size_t j = 0; j < frames.size(); j += 5) {
        const double before = (frames.frames[i].t - frames.frames[j].t).norm();
        const double after = (c.frames.frames[i].t - c.frames.frames[j].t).norm();
        CHECK(std::abs(before - after) < 1e-9);
      }
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
      REQUIRE((c.frames.frames[i].r - c.pose.axes.transpose() * frames.frames[i].r)
                  .cwiseAbs()
                  .maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("canonicalization does not depend on the input pose") {
  Rng rng = substream(43, 0);
  for (const auto& frames : fixture_corpus(50)) {
    const ProteinFrames base = canonicalize(frames).frames;
    const Mat3 rot = random_rotation(rng);
    const Vec3 shift = random_vector(rng, 50.0);
    CHECK(frame_deviation(canonicalize(transformed(frames, rot, shift)).frames, base) < 1e-6);
  }
}

TEST_CASE("orientation falls back to the first nonzero projection") {
  // Symmetric about every axis, so every third moment vanishes.
  std::vector<Vec3> pts{Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 2, 0), Vec3(0, -2, 0),
                        Vec3(0, 0, 3), Vec3(0, 0, -3)};
  const Mat3 flipped = Vec3(-1, -1, 1).asDiagonal();
  const Mat3 out = orient_axes(flipped, pts);
  CHECK(out.col(0) == Vec3(1, 0, 0));
  CHECK(out.col(1) == Vec3(0, 1, 0));
  CHECK(out.col(2) == Vec3(0, 0, 1));
}
