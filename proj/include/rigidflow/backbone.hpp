#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rigidflow/so3.hpp"

namespace rigidflow {

// Amino-acid identities 1..20 follow "ARNDCQEGHILKMFPSTWYV"; 21 is unknown.
inline constexpr int kUnknownResidue = 21;

int residue_index(std::string_view three_letter);
char residue_letter(int aa);

struct Residue {
  Vec3 n = Vec3::Zero();
  Vec3 ca = Vec3::Zero();
  Vec3 c = Vec3::Zero();
  int aa = kUnknownResidue;
};

struct ProteinBackbone {
  std::vector<Residue> residues;

  std::size_t size() const { return residues.size(); }
};

struct RigidTransform {
  Vec3 t = Vec3::Zero();
  Mat3 r = Mat3::Identity();
};

struct ProteinFrames {
  std::vector<RigidTransform> frames;
  std::vector<int> aa;

  std::size_t size() const { return frames.size(); }
};

struct ParsedBackbone {
  ProteinBackbone backbone;
  char chain = ' ';
  // Residues dropped because N, CA or C was missing.
  std::size_t skipped = 0;
};

// First model, first chain of PDB text. Residues are ordered by
// (residue number, insertion code); altloc ' ' or 'A' wins over others.
ParsedBackbone parse_backbone(std::string_view pdb_text);

// Every chain of the first model with at least two complete residues, in
// order of first appearance.
std::vector<ParsedBackbone> parse_chains(std::string_view pdb_text);

// Every MODEL block of a multi-model PDB (a single implicit model if the
// text has no MODEL records).
std::vector<ProteinBackbone> parse_models(std::string_view pdb_text);

std::string write_pdb(const ProteinBackbone& backbone, char chain = 'A');

// Gram-Schmidt frame of one residue: t = CA, r = [e1 e2 e3] with e1 along
// C - CA and e2 the component of N - CA orthogonal to e1.
RigidTransform frame_from_residue(const Residue& residue, std::size_t index = 0);

ProteinFrames frames_from_backbone(const ProteinBackbone& backbone);

// Idealized backbone geometry used to place N and C around a frame.
namespace ideal {
inline constexpr double kCaC = 1.525;        // Angstrom
inline constexpr double kNCa = 1.458;        // Angstrom
inline constexpr double kNCaCDegrees = 111.2;
}  // namespace ideal

ProteinBackbone backbone_from_frames(const ProteinFrames& frames);

// 22 distance bins: 21 equal-width bins over [1e-5, 20) A plus [20, inf).
// Distances below 1e-5 A fall in bin 0.
inline constexpr int kDistogramBins = 22;
inline constexpr double kDistogramMin = 1e-5;
inline constexpr double kDistogramMax = 20.0;

double distogram_edge(int k);
int distogram_bin(double distance);

}  // namespace rigidflow
