#pragma once

// Rigid flow matching between two views (g0, g1) of a structure. Per residue,
// translations follow LERP and rotations follow quaternion SLERP; the target
// velocity is the tau-derivative of that path:
//
//   u_trans = t1 - t0,     u_rot = d/dtau SLERP(q0, q1, tau)  (in R^4).
//
// A predictor is scored by the mean squared velocity error over residues and
// tau points; the bidirectional loss adds the same score on the swapped pair.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rigidflow/backbone.hpp"
#include "rigidflow/kernels.hpp"
#include "rigidflow/so3.hpp"
#include "rigidflow/views.hpp"

namespace rigidflow {

struct InterpolatedState {
  double tau = 0.0;
  ProteinFrames frames;
  std::vector<UnitQuaternion> q;  // the quaternions behind frames.r
};

struct VelocityField {
  std::vector<Vec3> trans;  // Angstrom per unit tau
  std::vector<Vec4> rot;    // quaternion tangent per unit tau

  static VelocityField zeros(std::size_t residues);
  std::size_t size() const { return trans.size(); }
};

using VelocityTarget = VelocityField;

class VelocityPredictor {
 public:
  virtual ~VelocityPredictor() = default;
  virtual VelocityField predict(const InterpolatedState& state) const = 0;
};

class ZeroPredictor final : public VelocityPredictor {
 public:
  VelocityField predict(const InterpolatedState& state) const override;
};

// Returns the exact target velocity of one pair at state.tau.
class OraclePredictor final : public VelocityPredictor {
 public:
  explicit OraclePredictor(const ViewPair& pair);
  VelocityField predict(const InterpolatedState& state) const override;

 private:
  PairArrays arrays_;
};

class FunctionPredictor final : public VelocityPredictor {
 public:
  using Fn = std::function<VelocityField(const InterpolatedState&)>;
  explicit FunctionPredictor(Fn fn) : fn_(std::move(fn)) {}
  VelocityField predict(const InterpolatedState& state) const override { return fn_(state); }

 private:
  Fn fn_;
};

// Free velocity values per (residue, tau grid point); entry (i, k) lives at
// index i * taus.size() + k.
struct VelocityTable {
  std::vector<double> taus;
  std::size_t residues = 0;
  std::vector<Vec3> trans;
  std::vector<Vec4> rot;

  static VelocityTable zeros(std::size_t residues, std::vector<double> taus);
  std::size_t index(std::size_t residue, std::size_t k) const { return residue * taus.size() + k; }
};

// Looks up the grid point nearest to state.tau.
class TabularPredictor final : public VelocityPredictor {
 public:
  explicit TabularPredictor(VelocityTable table);
  VelocityField predict(const InterpolatedState& state) const override;
  const VelocityTable& table() const { return table_; }

 private:
  VelocityTable table_;
};

enum class Direction { Forward, Backward, Bidirectional };

struct LossReport {
  double l_r3 = 0.0;
  double l_so3 = 0.0;
  double total = 0.0;
  Direction direction = Direction::Forward;
};

struct BidirectionalLoss {
  LossReport forward;
  LossReport backward;
  LossReport combined;  // forward + backward
};

PairArrays pair_arrays(const ViewPair& pair);
ViewPair swapped(const ViewPair& pair);

// {0.05, 0.15, ..., 0.95}
std::vector<double> default_tau_grid();
std::vector<double> random_taus(std::size_t n, std::uint64_t seed);

InterpolatedState interpolate(const ViewPair& pair, double tau);
VelocityTarget target_velocity(const ViewPair& pair, double tau);

LossReport directional_loss(const VelocityPredictor& predictor, const ViewPair& pair,
                            std::span<const double> taus);

// Forward on (g0, g1) plus backward on (g1, g0); the backward targets are
// recomputed from the swapped pair.
BidirectionalLoss bidirectional_loss(const VelocityPredictor& forward,
                                     const VelocityPredictor& backward, const ViewPair& pair,
                                     std::span<const double> taus);
BidirectionalLoss bidirectional_loss(const VelocityPredictor& predictor, const ViewPair& pair,
                                     std::span<const double> taus);

// Explicit Euler from g0 over tau in [0, 1] with n_steps steps:
// t <- t + u_trans / n, q <- normalize(q + u_rot / n).
ProteinFrames integrate_flow(const VelocityPredictor& predictor, const ProteinFrames& g0,
                             int n_steps);

// Forward-direction loss of a velocity table, viewed as a function of its
// entries, with its analytic gradient 2 (pred - target) / (L * K).
class TableObjective {
 public:
  TableObjective(const ViewPair& pair, std::vector<double> taus);

  const VelocityTable& targets() const { return targets_; }
  LossReport loss(const VelocityTable& table) const;
  VelocityTable gradient(const VelocityTable& table) const;

 private:
  VelocityTable targets_;
};

struct FitResult {
  VelocityTable table;
  LossReport initial;
  LossReport final;
  int steps = 0;
};

inline constexpr int kDefaultFitSteps = 5000;
inline constexpr double kDefaultFitLearningRate = 0.1;
inline constexpr int kDivergencePatience = 50;

// Gradient descent on a tabular predictor, starting from `initial` (zeros
// when omitted). Throws Error(Diverged) after 50 consecutive loss increases.
FitResult fit_tabular_predictor(const ViewPair& pair, std::span<const double> taus,
                                int steps = kDefaultFitSteps,
                                double lr = kDefaultFitLearningRate,
                                const VelocityTable* initial = nullptr);

}  // namespace rigidflow
