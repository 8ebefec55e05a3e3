#include "rigidflow/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rigidflow/backbone.hpp"
#include "rigidflow/canonicalize.hpp"
#include "rigidflow/errors.hpp"
#include "rigidflow/flowmatch.hpp"
#include "rigidflow/igso3.hpp"
#include "rigidflow/kernels.hpp"
#include "rigidflow/records.hpp"
#include "rigidflow/views.hpp"

namespace rigidflow::cli {

namespace {

namespace fs = std::filesystem;

// Flag validation or unreadable input; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 0;
  double delta_ns = kDefaultDeltaNs;
  double stride_ns = 0.0;  // 0: same as delta
  double sigma = 0.03;
  double epsilon = 0.5;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot read '{}'", path));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Writes the whole output at once; a failed command leaves no file behind.
void write_output(const std::string& path, const std::string& data) {
  if (path == "-") {
    std::cout << data << std::flush;
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError(fmt::format("cannot write '{}'", path));
    out << data;
    if (!out) throw UsageError(fmt::format("failed writing '{}'", path));
  }
  fs::rename(tmp, path);
}

std::string stem_of(const std::string& path) {
  return path == "-" ? std::string("stdin") : fs::path(path).stem().string();
}

// Runs body(i) for every item in parallel; outputs stay in input order and
// the error of the lowest failing index is rethrown.
std::string ordered_map(std::size_t n, const std::function<std::string(std::size_t)>& body) {
  std::vector<std::string> parts(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      parts[static_cast<std::size_t>(i)] = body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::string out;
  for (auto& p : parts) out += p;
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

struct PredictorChoice {
  std::string kind;  // zero | oracle | table
  std::vector<TableRecord> tables;
};

PredictorChoice parse_predictor(const std::string& spec) {
  PredictorChoice choice;
  if (spec == "zero" || spec == "oracle") {
    choice.kind = spec;
  } else if (spec.starts_with("table:")) {
    choice.kind = "table";
    choice.tables = parse_tables(read_input(spec.substr(6)));
  } else {
    throw UsageError(fmt::format("unknown predictor '{}' (zero | oracle | table:PATH)", spec));
  }
  return choice;
}

std::unique_ptr<VelocityPredictor> make_predictor(const PredictorChoice& choice,
                                                  const ViewPair& pair, const std::string& id,
                                                  std::string_view direction) {
  if (choice.kind == "zero") return std::make_unique<ZeroPredictor>();
  if (choice.kind == "oracle") {
    return std::make_unique<OraclePredictor>(direction == "forward" ? pair : swapped(pair));
  }
  for (const auto& t : choice.tables) {
    if (t.id == id && t.direction == direction) return std::make_unique<TabularPredictor>(t.table);
  }
  throw UsageError(fmt::format("no {} velocity table for '{}'", direction, id));
}

std::vector<double> resolve_taus(const std::vector<double>& taus, std::size_t random_count,
                                 std::uint64_t seed) {
  if (random_count > 0) return random_taus(random_count, seed);
  if (!taus.empty()) return taus;
  return default_tau_grid();
}

struct PairInput {
  std::vector<ViewPair> pairs;
  std::vector<std::string> ids;
};

PairInput read_pairs(const std::string& path) {
  PairInput in;
  in.pairs = pairs_from_records(parse_records(read_input(path)), &in.ids);
  return in;
}

std::vector<ProteinBackbone> read_trajectory(const std::string& path) {
  if (path != "-" && fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pdb") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ProteinBackbone> snapshots;
    for (const auto& f : files) snapshots.push_back(parse_backbone(read_input(f.string())).backbone);
    return snapshots;
  }
  return parse_models(read_input(path));
}

std::vector<double> read_times(const std::string& path) {
  std::vector<double> times;
  std::istringstream in(read_input(path));
  std::string token;
  while (in >> token) {
    try {
      times.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("bad time value '{}' in '{}'", token, path));
    }
  }
  return times;
}

int report_library_error(const Error& e) {
  fmt::print(stderr, "error: {}\n", e.what());
  return kExitLibrary;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Rigid-body frames, canonicalization, view pairs and flow-matching targets",
               "rigidflow"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", global.threads, "Worker threads (default: all)");
  app.add_option("--delta-ns", global.delta_ns, "MD pairing interval in ns")->capture_default_str();
  app.add_option("--stride-ns", global.stride_ns, "MD start-time stride in ns (default: delta)");
  app.add_option("--sigma", global.sigma, "Translation noise in Angstrom")->capture_default_str();
  app.add_option("--epsilon", global.epsilon, "IGSO(3) concentration")->capture_default_str();

  std::vector<std::string> in_paths;
  std::string in_path;
  std::string out_path = "-";
  std::string id;
  std::string predictor_spec = "oracle";
  std::vector<double> taus;
  std::size_t random_tau_count = 0;
  int steps = 0;
  double lr = kDefaultFitLearningRate;
  double frame_dt_ns = 1.0;
  std::string times_path;
  std::size_t sample_count = 100000;

  auto* frames_cmd = app.add_subcommand("frames", "PDB backbone -> per-residue rigid frames");
  frames_cmd->add_option("--in", in_paths, "PDB file(s)")->required();
  frames_cmd->add_option("--out", out_path, "Frames JSONL");

  auto* canon_cmd = app.add_subcommand("canonicalize", "Align frames to the inertial frame");
  canon_cmd->add_option("--in", in_path, "Frames JSONL")->required();
  canon_cmd->add_option("--out", out_path, "Frames JSONL");

  auto* perturb_cmd = app.add_subcommand("perturb", "Phase-I SE(3) perturbation view pairs");
  perturb_cmd->add_option("--in", in_path, "Frames JSONL")->required();
  perturb_cmd->add_option("--out", out_path, "Pair JSONL");

  auto* md_cmd = app.add_subcommand("mdpairs", "Time-separated MD snapshot pairs");
  md_cmd->add_option("--in", in_path, "Multi-MODEL PDB or directory of per-frame PDB files")
      ->required();
  md_cmd->add_option("--out", out_path, "Pair JSONL");
  md_cmd->add_option("--frame-dt-ns", frame_dt_ns, "Time between snapshots in ns")
      ->capture_default_str();
  md_cmd->add_option("--times", times_path, "File with one snapshot time (ns) per frame");
  md_cmd->add_option("--id", id, "Source id (default: input name)");

  auto* target_cmd = app.add_subcommand("fmtarget", "Dump flow-matching velocity targets");
  target_cmd->add_option("--in", in_path, "Pair JSONL")->required();
  target_cmd->add_option("--out", out_path, "Target JSONL");

  auto* loss_cmd = app.add_subcommand("fmloss", "Evaluate a predictor's flow-matching loss");
  loss_cmd->add_option("--in", in_path, "Pair JSONL")->required();
  loss_cmd->add_option("--out", out_path, "Loss CSV");
  loss_cmd->add_option("--predictor", predictor_spec, "zero | oracle | table:PATH")
      ->capture_default_str();

  auto* fit_cmd = app.add_subcommand("fit", "Fit tabular velocity predictors by gradient descent");
  fit_cmd->add_option("--in", in_path, "Pair JSONL")->required();
  fit_cmd->add_option("--out", out_path, "Velocity table JSONL");
  fit_cmd->add_option("--steps", steps, "Gradient steps (default 5000)");
  fit_cmd->add_option("--lr", lr, "Learning rate")->capture_default_str();

  auto* integrate_cmd = app.add_subcommand("integrate", "Euler rollout of a predictor from g0");
  integrate_cmd->add_option("--in", in_path, "Pair JSONL")->required();
  integrate_cmd->add_option("--out", out_path, "Frames JSONL");
  integrate_cmd->add_option("--predictor", predictor_spec, "zero | oracle | table:PATH")
      ->capture_default_str();
  integrate_cmd->add_option("--steps", steps, "Euler steps (default 1000)");

  for (auto* cmd : {target_cmd, loss_cmd, fit_cmd}) {
    cmd->add_option("--taus", taus, "Explicit tau values (default 0.05, 0.15, ..., 0.95)");
    cmd->add_option("--random-taus", random_tau_count, "Draw this many tau ~ U[0,1] instead");
  }

  auto* sample_cmd = app.add_subcommand("sample-igso3", "Draw rotations from IG(I, eps^2)");
  sample_cmd->add_option("--n", sample_count, "Number of samples")->capture_default_str();
  sample_cmd->add_option("--out", out_path, "CSV of angle and rotation vector");

  auto* verify_cmd = app.add_subcommand("verify", "Check record invariants");
  verify_cmd->add_option("--in", in_path, "Frames or pair JSONL")->required();
  verify_cmd->add_option("--out", out_path, "Report (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    int threads = global.threads;
    if (const char* env = std::getenv("RIGID_FRAMES_THREADS")) {
      try {
        threads = std::stoi(env);
      } catch (const std::exception&) {
        throw UsageError(fmt::format("RIGID_FRAMES_THREADS='{}' is not an integer", env));
      }
    }
    require(threads >= 0, "--threads must be >= 0");
    set_num_threads(threads);
    const double stride = global.stride_ns > 0.0 ? global.stride_ns : global.delta_ns;

    if (*frames_cmd) {
      std::vector<std::size_t> skipped(in_paths.size());
      std::string out;
      try {
        out = ordered_map(in_paths.size(), [&](std::size_t i) {
          const auto chains = parse_chains(read_input(in_paths[i]));
          const std::string stem = stem_of(in_paths[i]);
          std::string records;
          for (const auto& chain : chains) {
            skipped[i] += chain.skipped;
            const std::string record_id =
                chains.size() == 1 ? stem : fmt::format("{}_{}", stem, chain.chain);
            records += write_record(
                to_record(record_id, frames_from_backbone(chain.backbone), RecordMeta{}));
          }
          return records;
        });
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::NoResidues || e.kind() == ErrorKind::MalformedRecord) {
          fmt::print(stderr, "error: {}\n", e.what());
          return kExitUsage;
        }
        throw;
      }
      for (std::size_t i = 0; i < in_paths.size(); ++i) {
        if (skipped[i]) {
          fmt::print(stderr, "warning: {}: skipped {} residue(s) missing N, CA or C\n",
                     in_paths[i], skipped[i]);
        }
      }
      write_output(out_path, out);
      return kExitOk;
    }

    if (*canon_cmd) {
      const auto records = parse_records(read_input(in_path));
      write_output(out_path, ordered_map(records.size(), [&](std::size_t i) {
        const CanonicalFrames canonical = canonicalize(to_frames(records[i]));
        RecordMeta meta = records[i].meta;
        meta.provenance = "canonical";
        meta.canonical = true;
        attach_pose(meta, canonical.pose);
        return write_record(to_record(records[i].id, canonical.frames, meta));
      }));
      return kExitOk;
    }

    if (*perturb_cmd) {
      require(global.sigma >= 0.0, "--sigma must be >= 0");
      require(global.epsilon > 0.0, "--epsilon must be > 0");
      const auto records = parse_records(read_input(in_path));
      igso3::cached_table(global.epsilon);
      write_output(out_path, ordered_map(records.size(), [&](std::size_t i) {
        // Record i uses seed + i, stored in the output metadata.
        const PerturbConfig config{global.sigma, global.epsilon, global.seed + i};
        return write_pair(records[i].id, make_phase1_pair(to_frames(records[i]), config));
      }));
      return kExitOk;
    }

    if (*md_cmd) {
      require(global.delta_ns > 0.0, "--delta-ns must be > 0");
      require(frame_dt_ns > 0.0, "--frame-dt-ns must be > 0");
      TrajectorySeries traj;
      traj.snapshots = read_trajectory(in_path);
      if (!times_path.empty()) {
        traj.times = read_times(times_path);
        require(traj.times.size() == traj.snapshots.size(),
                "--times must list one time per snapshot");
      } else {
        for (std::size_t k = 0; k < traj.snapshots.size(); ++k) traj.times.push_back(k * frame_dt_ns);
      }
      const std::string source = id.empty() ? stem_of(in_path) : id;
      const auto pairs = extract_md_pairs(traj, global.delta_ns, stride, source);
      std::string out;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        out += write_pair(fmt::format("{}_s{}", source, format_double(pairs[k].s)), pairs[k]);
      }
      write_output(out_path, out);
      return kExitOk;
    }

    if (*target_cmd) {
      const auto in = read_pairs(in_path);
      const auto grid = resolve_taus(taus, random_tau_count, global.seed);
      write_output(out_path, ordered_map(in.pairs.size(), [&](std::size_t i) {
        std::string out;
        for (const double tau : grid) {
          out += write_target(in.ids[i], tau, target_velocity(in.pairs[i], tau));
        }
        return out;
      }));
      return kExitOk;
    }

    if (*loss_cmd) {
      const auto in = read_pairs(in_path);
      const auto grid = resolve_taus(taus, random_tau_count, global.seed);
      const PredictorChoice choice = parse_predictor(predictor_spec);
      std::string out = "id,direction,l_r3,l_so3,total\n";
      out += ordered_map(in.pairs.size(), [&](std::size_t i) {
        const auto fwd = make_predictor(choice, in.pairs[i], in.ids[i], "forward");
        const auto bwd = make_predictor(choice, in.pairs[i], in.ids[i], "backward");
        const BidirectionalLoss loss = bidirectional_loss(*fwd, *bwd, in.pairs[i], grid);
        std::string rows;
        const std::pair<const char*, const LossReport*> entries[] = {
            {"forward", &loss.forward}, {"backward", &loss.backward},
            {"bidirectional", &loss.combined}};
        for (const auto& [name, r] : entries) {
          rows += fmt::format("{},{},{},{},{}\n", in.ids[i], name, format_double(r->l_r3),
                              format_double(r->l_so3), format_double(r->total));
        }
        return rows;
      });
      write_output(out_path, out);
      return kExitOk;
    }

    if (*fit_cmd) {
      const auto in = read_pairs(in_path);
      const auto grid = resolve_taus(taus, random_tau_count, global.seed);
      const int n_steps = steps > 0 ? steps : kDefaultFitSteps;
      require(lr > 0.0, "--lr must be > 0");
      std::vector<std::string> summaries(in.pairs.size());
      const std::string out = ordered_map(in.pairs.size(), [&](std::size_t i) {
        const FitResult fwd = fit_tabular_predictor(in.pairs[i], grid, n_steps, lr);
        const FitResult bwd = fit_tabular_predictor(swapped(in.pairs[i]), grid, n_steps, lr);
        summaries[i] = fmt::format("{}: forward {:.6g} -> {:.6g}, backward {:.6g} -> {:.6g}\n",
                                   in.ids[i], fwd.initial.total, fwd.final.total,
                                   bwd.initial.total, bwd.final.total);
        return write_table(in.ids[i], "forward", fwd.table) +
               write_table(in.ids[i], "backward", bwd.table);
      });
      for (const auto& s : summaries) fmt::print(stderr, "{}", s);
      write_output(out_path, out);
      return kExitOk;
    }

    if (*integrate_cmd) {
      const auto in = read_pairs(in_path);
      const int n_steps = steps > 0 ? steps : 1000;
      const PredictorChoice choice = parse_predictor(predictor_spec);
      std::vector<std::string> summaries(in.pairs.size());
      const std::string out = ordered_map(in.pairs.size(), [&](std::size_t i) {
        const auto predictor = make_predictor(choice, in.pairs[i], in.ids[i], "forward");
        const ProteinFrames end = integrate_flow(*predictor, in.pairs[i].g0, n_steps);
        double max_t = 0.0;
        double max_r = 0.0;
        for (std::size_t k = 0; k < end.size(); ++k) {
          max_t = std::max(max_t, (end.frames[k].t - in.pairs[i].g1.frames[k].t).norm());
          max_r = std::max(max_r, rotation_angle(end.frames[k].r, in.pairs[i].g1.frames[k].r));
        }
        summaries[i] = fmt::format("{}: endpoint error vs g1: {:.3g} A, {:.3g} rad\n", in.ids[i],
                                   max_t, max_r);
        RecordMeta meta;
        meta.provenance = "integrated";
        return write_record(to_record(in.ids[i], end, meta));
      });
      for (const auto& s : summaries) fmt::print(stderr, "{}", s);
      write_output(out_path, out);
      return kExitOk;
    }

    if (*sample_cmd) {
      require(global.epsilon > 0.0, "--epsilon must be > 0");
      const auto& table = igso3::cached_table(global.epsilon);
      const auto samples = parallel::sample_igso3(table, sample_count, global.seed);
      std::string out = "angle,omega_x,omega_y,omega_z\n";
      out.reserve(samples.size() * 96);
      for (const auto& s : samples) {
        const Vec3 omega = s.angle * s.axis;
        out += fmt::format("{},{},{},{}\n", format_double(s.angle), format_double(omega.x()),
                           format_double(omega.y()), format_double(omega.z()));
      }
      write_output(out_path, out);
      return kExitOk;
    }

    if (*verify_cmd) {
      std::vector<FramesRecord> records;
      try {
        records = parse_records(read_input(in_path));
      } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitUsage;
      }
      std::string report = fmt::format("{:<6} {:<24} {:<18} {:<5} {}\n", "record", "id", "check",
                                       "status", "detail");
      bool all_pass = true;
      for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& c : check_record(records[i])) {
          const char* status = c.status == CheckStatus::Pass   ? "pass"
                               : c.status == CheckStatus::Fail ? "FAIL"
                                                               : "skip";
          all_pass = all_pass && c.status != CheckStatus::Fail;
          report += fmt::format("{:<6} {:<24} {:<18} {:<5} {}\n", i, records[i].id, c.check,
                                status, c.detail);
        }
      }
      report += all_pass ? "verify: all checks passed\n" : "verify: FAILED\n";
      write_output(out_path, report);
      return all_pass ? kExitOk : kExitVerifyFailed;
    }
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    return report_library_error(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace rigidflow::cli
