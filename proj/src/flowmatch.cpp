#include "rigidflow/flowmatch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "rigidflow/errors.hpp"
#include "rigidflow/rng.hpp"

namespace rigidflow {

namespace {

void check_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("tau = {} outside [0, 1]", tau));
  }
}

void check_taus(std::span<const double> taus) {
  if (taus.empty()) throw Error(ErrorKind::InvalidArgument, "empty tau list");
  for (const double tau : taus) check_tau(tau);
}

void check_prediction(const VelocityField& pred, std::size_t residues) {
  if (pred.trans.size() != residues || pred.rot.size() != residues) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("predictor returned {}x{} velocities for {} residues",
                            pred.trans.size(), pred.rot.size(), residues));
  }
  for (std::size_t i = 0; i < residues; ++i) {
    if (!pred.trans[i].allFinite() || !pred.rot[i].allFinite()) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("predictor returned a non-finite velocity at residue {}", i), i);
    }
  }
}

InterpolatedState make_state(const PairArrays& arrays, const std::vector<int>& aa, double tau) {
  const std::size_t n = arrays.size();
  InterpolatedState state;
  state.tau = tau;
  state.q.resize(n);
  std::vector<Vec3> t(n);
  parallel::interpolate(arrays, tau, t, state.q);
  state.frames.aa = aa;
  state.frames.frames.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    state.frames.frames[i] = {t[i], matrix_from_quat(state.q[i])};
  }
  return state;
}

VelocityField velocities_at(const PairArrays& arrays, double tau) {
  VelocityField field = VelocityField::zeros(arrays.size());
  parallel::velocities(arrays, tau, field.trans, field.rot);
  return field;
}

LossReport report(double sum_t, double sum_r, std::size_t count, Direction direction) {
  LossReport out;
  out.l_r3 = sum_t / static_cast<double>(count);
  out.l_so3 = sum_r / static_cast<double>(count);
  out.total = out.l_r3 + out.l_so3;
  out.direction = direction;
  return out;
}

LossReport scored(const VelocityPredictor& predictor, const ViewPair& pair,
                  std::span<const double> taus, Direction direction) {
  check_taus(taus);
  const PairArrays arrays = pair_arrays(pair);
  const std::size_t n = arrays.size();
  std::vector<double> err_t(n * taus.size());
  std::vector<double> err_r(n * taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const InterpolatedState state = make_state(arrays, pair.g0.aa, taus[k]);
    const VelocityField target = velocities_at(arrays, taus[k]);
    const VelocityField pred = predictor.predict(state);
    check_prediction(pred, n);
    parallel::squared_errors(pred.trans, pred.rot, target.trans, target.rot,
                             std::span(err_t).subspan(k * n, n),
                             std::span(err_r).subspan(k * n, n));
  }
  return report(pairwise_sum(err_t), pairwise_sum(err_r), err_t.size(), direction);
}

}  // namespace

VelocityField VelocityField::zeros(std::size_t residues) {
  return {std::vector<Vec3>(residues, Vec3::Zero()), std::vector<Vec4>(residues, Vec4::Zero())};
}

VelocityField ZeroPredictor::predict(const InterpolatedState& state) const {
  return VelocityField::zeros(state.frames.size());
}

OraclePredictor::OraclePredictor(const ViewPair& pair) : arrays_(pair_arrays(pair)) {}

VelocityField OraclePredictor::predict(const InterpolatedState& state) const {
  return velocities_at(arrays_, state.tau);
}

VelocityTable VelocityTable::zeros(std::size_t residues, std::vector<double> taus) {
  VelocityTable table;
  table.residues = residues;
  table.taus = std::move(taus);
  table.trans.assign(residues * table.taus.size(), Vec3::Zero());
  table.rot.assign(residues * table.taus.size(), Vec4::Zero());
  return table;
}

TabularPredictor::TabularPredictor(VelocityTable table) : table_(std::move(table)) {
  if (table_.taus.empty()) throw Error(ErrorKind::InvalidArgument, "velocity table has no tau grid");
  const std::size_t entries = table_.residues * table_.taus.size();
  if (table_.trans.size() != entries || table_.rot.size() != entries) {
    throw Error(ErrorKind::InvalidArgument, "velocity table size does not match its grid");
  }
}

VelocityField TabularPredictor::predict(const InterpolatedState& state) const {
  if (state.frames.size() != table_.residues) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("table holds {} residues, state has {}", table_.residues,
                            state.frames.size()));
  }
  std::size_t k = 0;
  for (std::size_t j = 1; j < table_.taus.size(); ++j) {
    if (std::abs(table_.taus[j] - state.tau) < std::abs(table_.taus[k] - state.tau)) k = j;
  }
  VelocityField field = VelocityField::zeros(table_.residues);
  for (std::size_t i = 0; i < table_.residues; ++i) {
    field.trans[i] = table_.trans[table_.index(i, k)];
    field.rot[i] = table_.rot[table_.index(i, k)];
  }
  return field;
}

PairArrays pair_arrays(const ViewPair& pair) {
  if (pair.g0.size() != pair.g1.size()) {
    throw Error(ErrorKind::ResidueMismatch,
                fmt::format("views have {} and {} residues", pair.g0.size(), pair.g1.size()));
  }
  PairArrays arrays;
  arrays.t0.reserve(pair.g0.size());
  arrays.t1.reserve(pair.g1.size());
  for (const auto& f : pair.g0.frames) arrays.t0.push_back(f.t);
  for (const auto& f : pair.g1.frames) arrays.t1.push_back(f.t);
  arrays.q0 = parallel::to_quaternions(pair.g0.frames);
  arrays.q1 = parallel::to_quaternions(pair.g1.frames);
  return arrays;
}

ViewPair swapped(const ViewPair& pair) {
  ViewPair out = pair;
  std::swap(out.g0, out.g1);
  std::swap(out.pose0, out.pose1);
  return out;
}

std::vector<double> default_tau_grid() {
  std::vector<double> taus;
  for (int k = 0; k < 10; ++k) taus.push_back(0.05 + 0.1 * k);
  return taus;
}

std::vector<double> random_taus(std::size_t n, std::uint64_t seed) {
  Rng rng = substream(seed, 0);
  std::vector<double> taus(n);
  for (auto& tau : taus) tau = uniform01(rng);
  return taus;
}

InterpolatedState interpolate(const ViewPair& pair, double tau) {
  check_tau(tau);
  return make_state(pair_arrays(pair), pair.g0.aa, tau);
}

VelocityTarget target_velocity(const ViewPair& pair, double tau) {
  check_tau(tau);
  return velocities_at(pair_arrays(pair), tau);
}

LossReport directional_loss(const VelocityPredictor& predictor, const ViewPair& pair,
                            std::span<const double> taus) {
  return scored(predictor, pair, taus, Direction::Forward);
}

BidirectionalLoss bidirectional_loss(const VelocityPredictor& forward,
                                     const VelocityPredictor& backward, const ViewPair& pair,
                                     std::span<const double> taus) {
  BidirectionalLoss out;
  out.forward = scored(forward, pair, taus, Direction::Forward);
  out.backward = scored(backward, swapped(pair), taus, Direction::Backward);
  out.combined.l_r3 = out.forward.l_r3 + out.backward.l_r3;
  out.combined.l_so3 = out.forward.l_so3 + out.backward.l_so3;
  out.combined.total = out.forward.total + out.backward.total;
  out.combined.direction = Direction::Bidirectional;
  return out;
}

BidirectionalLoss bidirectional_loss(const VelocityPredictor& predictor, const ViewPair& pair,
                                     std::span<const double> taus) {
  return bidirectional_loss(predictor, predictor, pair, taus);
}

ProteinFrames integrate_flow(const VelocityPredictor& predictor, const ProteinFrames& g0,
                             int n_steps) {
  if (n_steps < 1) throw Error(ErrorKind::InvalidArgument, "n_steps must be >= 1");
  const std::size_t n = g0.size();
  const double h = 1.0 / n_steps;
  InterpolatedState state;
  state.frames = g0;
  state.q = parallel::to_quaternions(g0.frames);
  for (int step = 0; step < n_steps; ++step) {
    state.tau = static_cast<double>(step) / n_steps;
    const VelocityField u = predictor.predict(state);
    check_prediction(u, n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& frame = state.frames.frames[i];
      frame.t += h * u.trans[i];
      state.q[i] = normalized(state.q[i].vec() + h * u.rot[i]);
      frame.r = matrix_from_quat(state.q[i]);
    }
  }
  return state.frames;
}

TableObjective::TableObjective(const ViewPair& pair, std::vector<double> taus) {
  check_taus(taus);
  const PairArrays arrays = pair_arrays(pair);
  targets_ = VelocityTable::zeros(arrays.size(), std::move(taus));
  for (std::size_t k = 0; k < targets_.taus.size(); ++k) {
    const VelocityField field = velocities_at(arrays, targets_.taus[k]);
    for (std::size_t i = 0; i < arrays.size(); ++i) {
      targets_.trans[targets_.index(i, k)] = field.trans[i];
      targets_.rot[targets_.index(i, k)] = field.rot[i];
    }
  }
}

LossReport TableObjective::loss(const VelocityTable& table) const {
  const std::size_t n = targets_.residues;
  const std::size_t taus = targets_.taus.size();
  // Same (tau-major) accumulation order as directional_loss.
  std::vector<double> err_t(n * taus);
  std::vector<double> err_r(n * taus);
  for (std::size_t k = 0; k < taus; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e = targets_.index(i, k);
      err_t[k * n + i] = (table.trans[e] - targets_.trans[e]).squaredNorm();
      err_r[k * n + i] = (table.rot[e] - targets_.rot[e]).squaredNorm();
    }
  }
  return report(pairwise_sum(err_t), pairwise_sum(err_r), err_t.size(), Direction::Forward);
}

VelocityTable TableObjective::gradient(const VelocityTable& table) const {
  VelocityTable grad = VelocityTable::zeros(targets_.residues, targets_.taus);
  const double scale = 2.0 / static_cast<double>(targets_.trans.size());
  for (std::size_t e = 0; e < grad.trans.size(); ++e) {
    grad.trans[e] = scale * (table.trans[e] - targets_.trans[e]);
    grad.rot[e] = scale * (table.rot[e] - targets_.rot[e]);
  }
  return grad;
}

FitResult fit_tabular_predictor(const ViewPair& pair, std::span<const double> taus, int steps,
                                double lr, const VelocityTable* initial) {
  if (steps < 1 || !(lr > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "fit needs steps >= 1 and lr > 0");
  }
  const TableObjective objective(pair, std::vector<double>(taus.begin(), taus.end()));
  FitResult out;
  out.table = initial ? *initial
                      : VelocityTable::zeros(objective.targets().residues, objective.targets().taus);
  if (out.table.trans.size() != objective.targets().trans.size() ||
      out.table.taus != objective.targets().taus) {
    throw Error(ErrorKind::InvalidArgument, "initial table does not match the pair and tau grid");
  }
  out.initial = objective.loss(out.table);
  double previous = out.initial.total;
  int increases = 0;
  for (int step = 1; step <= steps; ++step) {
    const VelocityTable grad = objective.gradient(out.table);
    for (std::size_t e = 0; e < grad.trans.size(); ++e) {
      out.table.trans[e] -= lr * grad.trans[e];
      out.table.rot[e] -= lr * grad.rot[e];
    }
    const double current = objective.loss(out.table).total;
    increases = current > previous ? increases + 1 : 0;
    if (increases >= kDivergencePatience) {
      throw Error(ErrorKind::Diverged,
                  fmt::format("loss increased for {} consecutive steps (step {}, loss {})",
                              kDivergencePatience, step, current));
    }
    previous = current;
    out.steps = step;
  }
  out.final = objective.loss(out.table);
  return out;
}

}  // namespace rigidflow
