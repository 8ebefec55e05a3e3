#include "fixtures.hpp"

#include <cmath>

#include "rigidflow/canonicalize.hpp"

namespace rigidflow::testing {

UnitQuaternion random_quaternion(Rng& rng) {
  Vec4 v;
  for (int k = 0; k < 4; ++k) v[k] = standard_normal(rng);
  v.normalize();
  if (v[0] < 0.0) v = -v;
  return UnitQuaternion::from_vec(v);
}

Mat3 random_rotation(Rng& rng) { return matrix_from_quat(random_quaternion(rng)); }

Vec3 random_vector(Rng& rng, double scale) {
  return scale * Vec3(standard_normal(rng), standard_normal(rng), standard_normal(rng));
}

ProteinBackbone random_backbone(std::size_t length, std::uint64_t seed) {
  Rng rng = substream(seed, 0x5eed);
  ProteinBackbone bb;
  Vec3 ca = random_vector(rng, 5.0);
  Vec3 dir = random_vector(rng).normalized();
  const double bend = ideal::kNCaCDegrees * M_PI / 180.0;
  for (std::size_t i = 0; i < length; ++i) {
    dir = (dir + 0.8 * random_vector(rng)).normalized();
    ca += 3.8 * dir;
    Vec3 side = random_vector(rng);
    side = (side - side.dot(dir) * dir).normalized();
    const Vec3 e1 = std::cos(0.6) * dir + std::sin(0.6) * side;
    Vec3 w = e1.cross(random_vector(rng));
    w.normalize();
    Residue r;
    r.ca = ca;
    r.c = ca + ideal::kCaC * e1;
    r.n = ca + ideal::kNCa * (std::cos(bend) * e1 + std::sin(bend) * w);
    r.aa = 1 + static_cast<int>(rng() % 20);
    bb.residues.push_back(r);
  }
  return bb;
}

ProteinFrames random_frames(std::size_t length, std::uint64_t seed) {
  return frames_from_backbone(random_backbone(length, seed));
}

std::vector<ProteinFrames> fixture_corpus(std::size_t count, double min_gap, std::uint64_t seed) {
  std::vector<ProteinFrames> corpus;
  for (std::uint64_t k = 0; corpus.size() < count; ++k) {
    const std::size_t length = 20 + (k * 7) % 60;
    ProteinFrames frames = random_frames(length, seed * 1000 + k);
    std::vector<Vec3> centered;
    const Vec3 c = center_of_mass(frames);
    for (const auto& f : frames.frames) centered.push_back(f.t - c);
    const Vec3 m = principal_axes(inertia_tensor(centered)).moments;
    const double gap = std::min(m[1] - m[0], m[2] - m[1]) / m[2];
    if (gap > min_gap) corpus.push_back(std::move(frames));
  }
  return corpus;
}

ViewPair random_pair(std::size_t length, std::uint64_t seed, double max_angle, double shift) {
  Rng rng = substream(seed, 0xbeef);
  ViewPair pair;
  const CanonicalFrames canonical = canonicalize(random_frames(length, seed));
  pair.g0 = canonical.frames;
  pair.pose0 = canonical.pose;
  pair.g1 = pair.g0;
  for (auto& f : pair.g1.frames) {
    const Vec3 axis = random_vector(rng).normalized();
    const double angle = max_angle * uniform01(rng);
    f.r = f.r * exp_map(angle * axis);
    f.t += random_vector(rng, shift);
  }
  return pair;
}

ProteinFrames transformed(const ProteinFrames& frames, const Mat3& rot, const Vec3& shift) {
  ProteinFrames out = frames;
  for (auto& f : out.frames) {
    f.t = rot * f.t + shift;
    f.r = rot * f.r;
  }
  return out;
}

std::string trajectory_pdb(std::size_t length, std::size_t models, std::uint64_t seed) {
  const ProteinBackbone base = random_backbone(length, seed);
  Rng rng = substream(seed, 0x7a1);
  std::string text;
  for (std::size_t m = 0; m < models; ++m) {
    ProteinBackbone snap = base;
    const Mat3 wobble = exp_map(random_vector(rng, 0.05));
    const Vec3 drift = random_vector(rng, 0.5);
    for (auto& r : snap.residues) {
      const Vec3 jitter = random_vector(rng, 0.1);
      r.n = wobble * r.n + drift + jitter;
      r.ca = wobble * r.ca + drift + jitter;
      r.c = wobble * r.c + drift + jitter;
    }
    text += "MODEL     " + std::to_string(m + 1) + "\n";
    text += write_pdb(snap);
    text += "ENDMDL\n";
  }
  return text;
}

std::string data_path(const std::string& name) {
  return std::string(RIGIDFLOW_TEST_DATA_DIR) + "/" + name;
}

}  // namespace rigidflow::testing
