#include "rigidflow/records.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include <fmt/format.h>
#include <json.hpp>

#include "rigidflow/canonicalize.hpp"
#include "rigidflow/errors.hpp"

namespace rigidflow {

namespace {

using json = nlohmann::json;
using Buffer = fmt::memory_buffer;

void put(Buffer& out, std::string_view s) { out.append(s.data(), s.data() + s.size()); }

void put_double(Buffer& out, double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, "cannot serialize a non-finite value");
  }
  put(out, format_double(v));
}

void put_string(Buffer& out, std::string_view s) { put(out, json(std::string(s)).dump()); }

template <class V>
void put_vector(Buffer& out, const V& v, int n) {
  put(out, "[");
  for (int k = 0; k < n; ++k) {
    if (k) put(out, ",");
    put_double(out, v[k]);
  }
  put(out, "]");
}

void put_mat3(Buffer& out, const Mat3& m) {
  put(out, "[");
  for (int row = 0; row < 3; ++row) {
    if (row) put(out, ",");
    put_vector(out, Vec3(m.row(row).transpose()), 3);
  }
  put(out, "]");
}

template <class Range, class Fn>
void put_list(Buffer& out, const Range& range, Fn&& each) {
  put(out, "[");
  bool first = true;
  for (const auto& item : range) {
    if (!first) put(out, ",");
    first = false;
    each(item);
  }
  put(out, "]");
}

void put_key(Buffer& out, std::string_view key, bool& first) {
  if (!first) put(out, ",");
  first = false;
  put_string(out, key);
  put(out, ":");
}

void put_meta(Buffer& out, const RecordMeta& meta) {
  bool first = true;
  put(out, "{");
  put_key(out, "provenance", first);
  put_string(out, meta.provenance);
  put_key(out, "canonical", first);
  put(out, meta.canonical ? "true" : "false");
  if (meta.view) {
    put_key(out, "view", first);
    put_string(out, *meta.view);
  }
  if (meta.source) {
    put_key(out, "source", first);
    put_string(out, *meta.source);
  }
  const std::pair<const char*, const std::optional<double>*> scalars[] = {
      {"sigma", &meta.sigma}, {"epsilon", &meta.epsilon}, {"s", &meta.s}, {"delta", &meta.delta}};
  for (const auto& [key, value] : scalars) {
    if (*value) {
      put_key(out, key, first);
      put_double(out, **value);
    }
  }
  if (meta.seed) {
    put_key(out, "seed", first);
    fmt::format_to(std::back_inserter(out), "{}", *meta.seed);
  }
  if (meta.centroid) {
    put_key(out, "centroid", first);
    put_vector(out, *meta.centroid, 3);
  }
  if (meta.axes) {
    put_key(out, "axes", first);
    put_mat3(out, *meta.axes);
  }
  put(out, "}");
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorKind::MalformedRecord, what);
}

template <int N>
Eigen::Matrix<double, N, 1> read_vector(const json& j) {
  if (!j.is_array() || j.size() != N) malformed(fmt::format("expected an array of {} numbers", N));
  Eigen::Matrix<double, N, 1> v;
  for (int k = 0; k < N; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) malformed("expected a number");
    v[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return v;
}

Mat3 read_mat3(const json& j) {
  if (!j.is_array() || j.size() != 3) malformed("expected a 3x3 array");
  Mat3 m;
  for (int row = 0; row < 3; ++row) m.row(row) = read_vector<3>(j[static_cast<std::size_t>(row)]);
  return m;
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) malformed(fmt::format("missing field '{}'", key));
  return *it;
}

RecordMeta read_meta(const json& j) {
  RecordMeta meta;
  if (!j.is_object()) malformed("meta must be an object");
  meta.provenance = j.value("provenance", std::string("raw"));
  meta.canonical = j.value("canonical", false);
  if (j.contains("view")) meta.view = j["view"].get<std::string>();
  if (j.contains("source")) meta.source = j["source"].get<std::string>();
  if (j.contains("sigma")) meta.sigma = j["sigma"].get<double>();
  if (j.contains("epsilon")) meta.epsilon = j["epsilon"].get<double>();
  if (j.contains("s")) meta.s = j["s"].get<double>();
  if (j.contains("delta")) meta.delta = j["delta"].get<double>();
  if (j.contains("seed")) meta.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("centroid")) meta.centroid = read_vector<3>(j["centroid"]);
  if (j.contains("axes")) meta.axes = read_mat3(j["axes"]);
  return meta;
}

json parse_json(std::string_view line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    malformed(fmt::format("invalid JSON: {}", e.what()));
  }
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  while (!text.empty()) {
    const auto pos = text.find('\n');
    const std::string_view line = text.substr(0, pos);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) fn(line);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
}

CanonicalPose pose_from_meta(const RecordMeta& meta) {
  CanonicalPose pose;
  if (meta.centroid) pose.centroid = *meta.centroid;
  if (meta.axes) pose.axes = *meta.axes;
  return pose;
}

}  // namespace

std::string format_double(double value) {
  // A bare "-0" would be read back as the integer 0.
  if (value == 0.0 && std::signbit(value)) return "-0.0";
  return fmt::format("{:.17g}", value);
}

FramesRecord to_record(std::string id, const ProteinFrames& frames, RecordMeta meta) {
  FramesRecord record;
  record.id = std::move(id);
  record.aa = frames.aa;
  record.meta = std::move(meta);
  record.t.reserve(frames.size());
  for (const auto& f : frames.frames) record.t.push_back(f.t);
  record.q = parallel::to_quaternions(frames.frames);
  return record;
}

ProteinFrames to_frames(const FramesRecord& record) {
  if (record.aa.size() != record.t.size() || record.q.size() != record.t.size()) {
    malformed(fmt::format("record '{}' has inconsistent array lengths", record.id));
  }
  ProteinFrames frames;
  frames.aa = record.aa;
  frames.frames.reserve(record.size());
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (std::abs(record.q[i].vec().norm() - 1.0) > 1e-9) {
      throw Error(ErrorKind::MalformedRecord,
                  fmt::format("record '{}': quaternion {} is not unit", record.id, i), i);
    }
    frames.frames.push_back({record.t[i], matrix_from_quat(record.q[i])});
  }
  return frames;
}

std::string write_record(const FramesRecord& record) {
  Buffer out;
  put(out, "{\"id\":");
  put_string(out, record.id);
  fmt::format_to(std::back_inserter(out), ",\"L\":{},\"aa\":", record.size());
  put_list(out, record.aa, [&](int aa) { fmt::format_to(std::back_inserter(out), "{}", aa); });
  put(out, ",\"t\":");
  put_list(out, record.t, [&](const Vec3& t) { put_vector(out, t, 3); });
  put(out, ",\"q\":");
  put_list(out, record.q, [&](const UnitQuaternion& q) { put_vector(out, q.vec(), 4); });
  put(out, ",\"meta\":");
  put_meta(out, record.meta);
  put(out, "}\n");
  return fmt::to_string(out);
}

FramesRecord parse_record(std::string_view line) {
  const json j = parse_json(line);
  if (!j.is_object()) malformed("record must be a JSON object");
  FramesRecord record;
  try {
    record.id = field(j, "id").get<std::string>();
    const auto length = field(j, "L").get<std::size_t>();
    const json& aa = field(j, "aa");
    const json& t = field(j, "t");
    const json& q = field(j, "q");
    if (!aa.is_array() || !t.is_array() || !q.is_array() || aa.size() != length ||
        t.size() != length || q.size() != length) {
      malformed(fmt::format("record '{}': arrays must have length L = {}", record.id, length));
    }
    for (const auto& a : aa) record.aa.push_back(a.get<int>());
    for (const auto& x : t) record.t.push_back(read_vector<3>(x));
    for (const auto& x : q) record.q.push_back(UnitQuaternion::from_vec(read_vector<4>(x)));
    if (j.contains("meta")) record.meta = read_meta(j["meta"]);
  } catch (const json::exception& e) {
    malformed(fmt::format("bad field type: {}", e.what()));
  }
  return record;
}

std::vector<FramesRecord> parse_records(std::string_view text) {
  std::vector<FramesRecord> records;
  for_each_line(text, [&](std::string_view line) { records.push_back(parse_record(line)); });
  return records;
}

void attach_pose(RecordMeta& meta, const CanonicalPose& pose) {
  meta.centroid = pose.centroid;
  meta.axes = pose.axes;
}

std::string write_pair(const std::string& id, const ViewPair& pair) {
  RecordMeta base;
  if (pair.provenance == Provenance::Perturb) {
    base.provenance = "perturb";
    base.sigma = pair.perturb.sigma;
    base.epsilon = pair.perturb.epsilon;
    base.seed = pair.perturb.seed;
  } else {
    base.provenance = "md";
    if (!pair.source_id.empty()) base.source = pair.source_id;
    base.s = pair.s;
    base.delta = pair.delta;
  }
  RecordMeta m0 = base;
  m0.view = "g0";
  m0.canonical = true;
  attach_pose(m0, pair.pose0);
  RecordMeta m1 = base;
  m1.view = "g1";
  // Phase-I views keep the perturbation in the g0 frame; MD views are each
  // canonicalized.
  m1.canonical = pair.provenance == Provenance::MD;
  attach_pose(m1, pair.pose1);
  return write_record(to_record(id, pair.g0, m0)) + write_record(to_record(id, pair.g1, m1));
}

std::vector<ViewPair> pairs_from_records(const std::vector<FramesRecord>& records,
                                         std::vector<std::string>* ids) {
  if (records.size() % 2 != 0) malformed("pair files hold an even number of records");
  std::vector<ViewPair> pairs;
  for (std::size_t k = 0; k + 1 < records.size(); k += 2) {
    const auto& r0 = records[k];
    const auto& r1 = records[k + 1];
    if (r0.meta.view != "g0" || r1.meta.view != "g1") {
      malformed(fmt::format("records {} and {} are not a g0/g1 pair", k, k + 1));
    }
    ViewPair pair;
    pair.g0 = to_frames(r0);
    pair.g1 = to_frames(r1);
    if (pair.g0.size() != pair.g1.size()) {
      throw Error(ErrorKind::ResidueMismatch,
                  fmt::format("pair '{}' views have different lengths", r0.id));
    }
    pair.provenance = r0.meta.provenance == "md" ? Provenance::MD : Provenance::Perturb;
    pair.perturb.sigma = r0.meta.sigma.value_or(0.0);
    pair.perturb.epsilon = r0.meta.epsilon.value_or(0.0);
    pair.perturb.seed = r0.meta.seed.value_or(0);
    pair.source_id = r0.meta.source.value_or("");
    pair.s = r0.meta.s.value_or(0.0);
    pair.delta = r0.meta.delta.value_or(0.0);
    pair.pose0 = pose_from_meta(r0.meta);
    pair.pose1 = pose_from_meta(r1.meta);
    pairs.push_back(std::move(pair));
    if (ids) ids->push_back(r0.id);
  }
  return pairs;
}

std::string write_target(const std::string& id, double tau, const VelocityTarget& target) {
  Buffer out;
  put(out, "{\"id\":");
  put_string(out, id);
  put(out, ",\"tau\":");
  put_double(out, tau);
  put(out, ",\"u_trans\":");
  put_list(out, target.trans, [&](const Vec3& v) { put_vector(out, v, 3); });
  put(out, ",\"u_rot\":");
  put_list(out, target.rot, [&](const Vec4& v) { put_vector(out, v, 4); });
  put(out, "}\n");
  return fmt::to_string(out);
}

std::string write_table(const std::string& id, std::string_view direction,
                        const VelocityTable& table) {
  Buffer out;
  put(out, "{\"id\":");
  put_string(out, id);
  put(out, ",\"direction\":");
  put_string(out, direction);
  fmt::format_to(std::back_inserter(out), ",\"residues\":{},\"taus\":", table.residues);
  put_list(out, table.taus, [&](double tau) { put_double(out, tau); });
  put(out, ",\"u_trans\":");
  put_list(out, table.trans, [&](const Vec3& v) { put_vector(out, v, 3); });
  put(out, ",\"u_rot\":");
  put_list(out, table.rot, [&](const Vec4& v) { put_vector(out, v, 4); });
  put(out, "}\n");
  return fmt::to_string(out);
}

std::vector<TableRecord> parse_tables(std::string_view text) {
  std::vector<TableRecord> tables;
  for_each_line(text, [&](std::string_view line) {
    const json j = parse_json(line);
    TableRecord rec;
    try {
      rec.id = field(j, "id").get<std::string>();
      rec.direction = field(j, "direction").get<std::string>();
      rec.table.residues = field(j, "residues").get<std::size_t>();
      rec.table.taus = field(j, "taus").get<std::vector<double>>();
      for (const auto& v : field(j, "u_trans")) rec.table.trans.push_back(read_vector<3>(v));
      for (const auto& v : field(j, "u_rot")) rec.table.rot.push_back(read_vector<4>(v));
    } catch (const json::exception& e) {
      malformed(fmt::format("bad velocity table: {}", e.what()));
    }
    const std::size_t entries = rec.table.residues * rec.table.taus.size();
    if (rec.table.trans.size() != entries || rec.table.rot.size() != entries) {
      malformed(fmt::format("velocity table '{}' has the wrong number of entries", rec.id));
    }
    tables.push_back(std::move(rec));
  });
  return tables;
}

std::vector<CheckResult> check_record(const FramesRecord& record) {
  std::vector<CheckResult> out;
  const std::size_t n = record.t.size();
  const bool lengths_ok = record.aa.size() == n && record.q.size() == n;
  out.push_back({"lengths", lengths_ok ? CheckStatus::Pass : CheckStatus::Fail,
                 fmt::format("L={} aa={} t={} q={}", n, record.aa.size(), n, record.q.size())});
  if (!lengths_ok) return out;

  CheckResult finite{"finite", CheckStatus::Pass, ""};
  CheckResult unit{"unit_quaternions", CheckStatus::Pass, ""};
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (finite.status == CheckStatus::Pass &&
        (!record.t[i].allFinite() || !record.q[i].vec().allFinite())) {
      finite = {"finite", CheckStatus::Fail, fmt::format("residue {}", i)};
    }
    const double dev = std::abs(record.q[i].vec().norm() - 1.0);
    if (dev > 1e-9 && unit.status == CheckStatus::Pass) {
      unit = {"unit_quaternions", CheckStatus::Fail,
              fmt::format("residue {} has |q| = {:.12g}", i, record.q[i].vec().norm())};
    }
    worst = std::max(worst, dev);
  }
  if (unit.status == CheckStatus::Pass) unit.detail = fmt::format("max ||q|-1| = {:.3g}", worst);
  out.push_back(finite);
  out.push_back(unit);

  if (!record.meta.canonical) {
    out.push_back({"centroid", CheckStatus::Skip, "non-canonical " + record.meta.provenance});
    out.push_back({"inertia_diagonal", CheckStatus::Skip, "non-canonical " + record.meta.provenance});
    return out;
  }
  Vec3 centroid = Vec3::Zero();
  for (const auto& t : record.t) centroid += t;
  centroid /= static_cast<double>(std::max<std::size_t>(n, 1));
  out.push_back({"centroid", centroid.norm() < 1e-6 ? CheckStatus::Pass : CheckStatus::Fail,
                 fmt::format("|centroid| = {:.3g}", centroid.norm())});

  std::vector<Vec3> centered;
  for (const auto& t : record.t) centered.push_back(t - centroid);
  const Mat3 inertia = inertia_tensor(centered);
  double off = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a != b) off = std::max(off, std::abs(inertia(a, b)));
    }
  }
  const double trace = inertia.trace();
  const bool ascending = inertia(0, 0) <= inertia(1, 1) && inertia(1, 1) <= inertia(2, 2);
  const bool diagonal = off < 1e-6 * std::max(trace, 1e-300);
  out.push_back({"inertia_diagonal", diagonal && ascending ? CheckStatus::Pass : CheckStatus::Fail,
                 fmt::format("max off-diagonal / trace = {:.3g}{}", off / std::max(trace, 1e-300),
                             ascending ? "" : ", diagonal not ascending")});
  return out;
}

}  // namespace rigidflow
