#pragma once

// JSONL interchange format. One object per line:
//
//   {"id": "...", "L": 3, "aa": [..], "t": [[x,y,z], ..], "q": [[w,x,y,z], ..],
//    "meta": {"provenance": "raw|canonical|perturb|md|integrated",
//             "canonical": true|false, "view": "g0|g1", "source": "...",
//             "sigma": .., "epsilon": .., "seed": .., "s": .., "delta": ..,
//             "centroid": [x,y,z], "axes": [[..],[..],[..]]}}
//
// Floats are written with 17 significant digits, so read(write(x)) == x
// bit for bit. A view pair is two consecutive records with view "g0", "g1".

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rigidflow/backbone.hpp"
#include "rigidflow/flowmatch.hpp"
#include "rigidflow/views.hpp"

namespace rigidflow {

struct RecordMeta {
  std::string provenance = "raw";
  bool canonical = false;
  std::optional<std::string> view;
  std::optional<std::string> source;
  std::optional<double> sigma;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<double> s;
  std::optional<double> delta;
  std::optional<Vec3> centroid;
  std::optional<Mat3> axes;

  bool operator==(const RecordMeta&) const = default;
};

struct FramesRecord {
  std::string id;
  std::vector<int> aa;
  std::vector<Vec3> t;
  std::vector<UnitQuaternion> q;
  RecordMeta meta;

  std::size_t size() const { return t.size(); }
  bool operator==(const FramesRecord&) const = default;
};

std::string format_double(double value);

FramesRecord to_record(std::string id, const ProteinFrames& frames, RecordMeta meta = {});

// Throws Error(MalformedRecord) when lengths disagree or a quaternion is not
// unit within 1e-9.
ProteinFrames to_frames(const FramesRecord& record);

// Single line terminated by '\n'.
std::string write_record(const FramesRecord& record);
FramesRecord parse_record(std::string_view line);
std::vector<FramesRecord> parse_records(std::string_view text);

void attach_pose(RecordMeta& meta, const CanonicalPose& pose);

// Two lines: g0 then g1.
std::string write_pair(const std::string& id, const ViewPair& pair);
std::vector<ViewPair> pairs_from_records(const std::vector<FramesRecord>& records,
                                         std::vector<std::string>* ids = nullptr);

std::string write_target(const std::string& id, double tau, const VelocityTarget& target);

std::string write_table(const std::string& id, std::string_view direction,
                        const VelocityTable& table);

struct TableRecord {
  std::string id;
  std::string direction;
  VelocityTable table;
};

std::vector<TableRecord> parse_tables(std::string_view text);

enum class CheckStatus { Pass, Fail, Skip };

struct CheckResult {
  std::string check;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

// Type invariants of one record: array lengths, finite values, unit
// quaternions, and for canonical records a zero centroid and a diagonal,
// ascending inertia tensor. Canonical-only checks are skipped otherwise.
std::vector<CheckResult> check_record(const FramesRecord& record);

}  // namespace rigidflow
