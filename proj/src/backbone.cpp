#include "rigidflow/backbone.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "rigidflow/errors.hpp"
#include "rigidflow/kernels.hpp"

namespace rigidflow {

namespace {

constexpr std::string_view kLetters = "ARNDCQEGHILKMFPSTWYV";
constexpr std::array<std::string_view, 20> kThreeLetter = {
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE",
    "LEU", "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

std::string_view column(std::string_view line, std::size_t first, std::size_t last) {
  // 1-based inclusive PDB columns.
  if (line.size() < first) return {};
  return line.substr(first - 1, std::min(last, line.size()) - (first - 1));
}

double parse_coordinate(std::string_view field, std::string_view line) {
  const std::string text(trim(field));
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::MalformedRecord, fmt::format("bad coordinate in line '{}'", line));
  }
  return value;
}

struct ResidueKey {
  int number;
  char icode;
  auto operator<=>(const ResidueKey&) const = default;
};

struct PartialResidue {
  std::optional<Vec3> n, ca, c;
  std::array<char, 3> altloc{' ', ' ', ' '};
  int aa = kUnknownResidue;
  bool hetero = false;
};

bool preferred_altloc(char altloc) { return altloc == ' ' || altloc == 'A'; }

void store_atom(PartialResidue& res, int slot, std::optional<Vec3>& dst, const Vec3& x,
                char altloc) {
  if (!dst || (!preferred_altloc(res.altloc[slot]) && preferred_altloc(altloc))) {
    dst = x;
    res.altloc[slot] = altloc;
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto pos = text.find('\n');
    std::string_view line = text.substr(0, pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return lines;
}

ParsedBackbone parse_model_lines(const std::vector<std::string_view>& lines,
                                 std::optional<char> chain = std::nullopt) {
  ParsedBackbone out;
  std::map<ResidueKey, PartialResidue> residues;

  for (const auto line : lines) {
    const bool atom = line.starts_with("ATOM  ");
    const bool hetatm = line.starts_with("HETATM");
    if (!atom && !hetatm) continue;
    const auto name = trim(column(line, 13, 16));
    const int slot = name == "N" ? 0 : name == "CA" ? 1 : name == "C" ? 2 : -1;
    if (slot < 0) continue;
    if (line.size() < 54) {
      throw Error(ErrorKind::MalformedRecord, fmt::format("truncated ATOM record '{}'", line));
    }
    const char chain_id = line[21];
    if (!chain) chain = chain_id;
    if (chain_id != *chain) continue;

    const auto number_field = std::string(trim(column(line, 23, 26)));
    char* end = nullptr;
    const long number = std::strtol(number_field.c_str(), &end, 10);
    if (number_field.empty() || end != number_field.c_str() + number_field.size()) {
      throw Error(ErrorKind::MalformedRecord, fmt::format("bad residue number in '{}'", line));
    }
    const ResidueKey key{static_cast<int>(number), line[26]};
    const Vec3 x(parse_coordinate(column(line, 31, 38), line),
                 parse_coordinate(column(line, 39, 46), line),
                 parse_coordinate(column(line, 47, 54), line));

    auto& res = residues[key];
    res.aa = residue_index(trim(column(line, 18, 20)));
    res.hetero = hetatm;
    auto& dst = slot == 0 ? res.n : slot == 1 ? res.ca : res.c;
    store_atom(res, slot, dst, x, line[16]);
  }

  out.chain = chain.value_or(' ');
  for (const auto& [key, res] : residues) {
    if (res.n && res.ca && res.c) {
      out.backbone.residues.push_back({*res.n, *res.ca, *res.c, res.aa});
    } else if (!res.hetero) {
      ++out.skipped;
    }
  }
  return out;
}

}  // namespace

int residue_index(std::string_view three_letter) {
  for (std::size_t i = 0; i < kThreeLetter.size(); ++i) {
    if (kThreeLetter[i] == three_letter) return static_cast<int>(i) + 1;
  }
  return kUnknownResidue;
}

char residue_letter(int aa) {
  if (aa >= 1 && aa <= 20) return kLetters[static_cast<std::size_t>(aa - 1)];
  return 'X';
}

namespace {

std::vector<std::string_view> first_model(std::string_view pdb_text) {
  std::vector<std::string_view> model;
  for (const auto line : split_lines(pdb_text)) {
    if (line.starts_with("ENDMDL")) break;
    model.push_back(line);
  }
  return model;
}

}  // namespace

ParsedBackbone parse_backbone(std::string_view pdb_text) {
  ParsedBackbone parsed = parse_model_lines(first_model(pdb_text));
  if (parsed.backbone.size() < 2) {
    throw Error(ErrorKind::NoResidues,
                fmt::format("no residues: {} complete residue(s) found, need at least 2",
                            parsed.backbone.size()));
  }
  return parsed;
}

std::vector<ParsedBackbone> parse_chains(std::string_view pdb_text) {
  const auto model = first_model(pdb_text);
  std::vector<char> order;
  for (const auto line : model) {
    if ((line.starts_with("ATOM  ") || line.starts_with("HETATM")) && line.size() > 21 &&
        std::find(order.begin(), order.end(), line[21]) == order.end()) {
      order.push_back(line[21]);
    }
  }
  std::vector<ParsedBackbone> chains;
  for (const char id : order) {
    ParsedBackbone parsed = parse_model_lines(model, id);
    if (parsed.backbone.size() >= 2) chains.push_back(std::move(parsed));
  }
  if (chains.empty()) {
    throw Error(ErrorKind::NoResidues, "no residues: no chain has 2 complete residues");
  }
  return chains;
}

std::vector<ProteinBackbone> parse_models(std::string_view pdb_text) {
  std::vector<ProteinBackbone> models;
  std::vector<std::string_view> current;
  bool in_model = false;
  auto flush = [&] {
    ParsedBackbone parsed = parse_model_lines(current);
    if (parsed.backbone.size() < 2) {
      throw Error(ErrorKind::NoResidues,
                  fmt::format("no residues in model {}", models.size() + 1));
    }
    models.push_back(std::move(parsed.backbone));
    current.clear();
  };
  for (const auto line : split_lines(pdb_text)) {
    if (line.starts_with("MODEL")) {
      in_model = true;
      current.clear();
    } else if (line.starts_with("ENDMDL")) {
      flush();
      in_model = false;
    } else {
      current.push_back(line);
    }
  }
  if (models.empty()) flush();
  else if (in_model) flush();
  return models;
}

std::string write_pdb(const ProteinBackbone& backbone, char chain) {
  std::string out;
  int serial = 1;
  for (std::size_t i = 0; i < backbone.size(); ++i) {
    const auto& res = backbone.residues[i];
    const int aa = res.aa;
    const std::string_view resname =
        aa >= 1 && aa <= 20 ? kThreeLetter[static_cast<std::size_t>(aa - 1)] : "UNK";
    const std::array<std::pair<const char*, const Vec3*>, 3> atoms{
        {{" N  ", &res.n}, {" CA ", &res.ca}, {" C  ", &res.c}}};
    for (const auto& [name, x] : atoms) {
      out += fmt::format("ATOM  {:5d} {:4s} {:3s} {:c}{:4d}    {:8.3f}{:8.3f}{:8.3f}  1.00  0.00\n",
                         serial++, name, resname, chain, static_cast<int>(i) + 1, x->x(),
                         x->y(), x->z());
    }
  }
  out += "END\n";
  return out;
}

RigidTransform frame_from_residue(const Residue& residue, std::size_t index) {
  const Vec3 v1 = residue.c - residue.ca;
  const Vec3 v2 = residue.n - residue.ca;
  const double n1 = v1.norm();
  const double n2 = v2.norm();
  if (n1 == 0.0 || n2 == 0.0 || v1.cross(v2).norm() < std::sin(1e-4) * n1 * n2) {
    throw Error(ErrorKind::CollinearAtoms, fmt::format("N, CA, C collinear at residue {}", index),
                index);
  }
  const Vec3 e1 = v1 / n1;
  const Vec3 u2 = v2 - e1.dot(v2) * e1;
  const Vec3 e2 = u2 / u2.norm();
  const Vec3 e3 = e1.cross(e2);
  RigidTransform frame;
  frame.t = residue.ca;
  frame.r.col(0) = e1;
  frame.r.col(1) = e2;
  frame.r.col(2) = e3;
  return frame;
}

ProteinFrames frames_from_backbone(const ProteinBackbone& backbone) {
  ProteinFrames out;
  out.frames = parallel::build_frames(backbone.residues);
  out.aa.reserve(backbone.size());
  for (const auto& res : backbone.residues) out.aa.push_back(res.aa);
  return out;
}

ProteinBackbone backbone_from_frames(const ProteinFrames& frames) {
  const double alpha = ideal::kNCaCDegrees * std::numbers::pi / 180.0;
  const Vec3 local_c(ideal::kCaC, 0.0, 0.0);
  const Vec3 local_n(ideal::kNCa * std::cos(alpha), ideal::kNCa * std::sin(alpha), 0.0);
  ProteinBackbone out;
  out.residues.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames.frames[i];
    Residue res;
    res.ca = f.t;
    res.c = f.t + f.r * local_c;
    res.n = f.t + f.r * local_n;
    res.aa = i < frames.aa.size() ? frames.aa[i] : kUnknownResidue;
    out.residues.push_back(res);
  }
  return out;
}

double distogram_edge(int k) {
  return kDistogramMin + k * (kDistogramMax - kDistogramMin) / (kDistogramBins - 1);
}

int distogram_bin(double distance) {
  if (distance >= kDistogramMax) return kDistogramBins - 1;
  if (distance < kDistogramMin) return 0;
  const double width = (kDistogramMax - kDistogramMin) / (kDistogramBins - 1);
  int k = static_cast<int>((distance - kDistogramMin) / width);
  k = std::clamp(k, 0, kDistogramBins - 2);
  // Guard against rounding at bin edges.
  while (k > 0 && distance < distogram_edge(k)) --k;
  while (k < kDistogramBins - 2 && distance >= distogram_edge(k + 1)) ++k;
  return k;
}

}  // namespace rigidflow
