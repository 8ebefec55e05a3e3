#pragma once

// Synthetic inputs shared by the unit and acceptance tests.

#include <cstdint>
#include <string>
#include <vector>

#include "rigidflow/backbone.hpp"
#include "rigidflow/rng.hpp"
#include "rigidflow/so3.hpp"
#include "rigidflow/views.hpp"

namespace rigidflow::testing {

// Haar-uniform rotation from a normalized Gaussian quaternion.
UnitQuaternion random_quaternion(Rng& rng);
Mat3 random_rotation(Rng& rng);
Vec3 random_vector(Rng& rng, double scale = 1.0);

// Protein-like chain: CA random walk with 3.8 A steps and a persistent
// direction, N and C at ideal bond lengths around each CA.
ProteinBackbone random_backbone(std::size_t length, std::uint64_t seed);
ProteinFrames random_frames(std::size_t length, std::uint64_t seed);

// Backbones with all three principal moments separated by more than
// min_gap relative to the largest.
std::vector<ProteinFrames> fixture_corpus(std::size_t count, double min_gap = 1e-3,
                                          std::uint64_t seed = 1);

// g0 = canonical random frames, g1 = g0 with each residue moved by a random
// rotation of angle <= max_angle and a translation of size ~ shift.
ViewPair random_pair(std::size_t length, std::uint64_t seed, double max_angle = 2.0,
                     double shift = 1.0);

ProteinFrames transformed(const ProteinFrames& frames, const Mat3& rot, const Vec3& shift);

// Multi-model PDB text: `models` snapshots of one chain drifting slowly.
std::string trajectory_pdb(std::size_t length, std::size_t models, std::uint64_t seed);

std::string data_path(const std::string& name);

}  // namespace rigidflow::testing
