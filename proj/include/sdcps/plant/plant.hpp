#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "sdcps/core/packet.hpp"
#include "sdcps/core/rng.hpp"
#include "sdcps/core/types.hpp"
#include "sdcps/topology/hierarchy.hpp"
#include "sdcps/topology/partition.hpp"

namespace sdcps {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// x(k+1) = A x(k) + B u(k),  y(k) = C x(k) + D u(k), with optional
/// Gaussian process and measurement noise.
struct PlantModel {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  double process_noise_std = 0.0;
  double measurement_noise_std = 0.0;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return B.cols(); }
  Eigen::Index outputs() const { return C.rows(); }

  /// Throws DimensionMismatch when the four matrices do not fit together.
  void validate() const;

  /// n-state, n-input, fully observed plant: C = I, D = 0.
  static PlantModel fully_observed(const Matrix& A, const Matrix& B);
};

/// State and estimate kept in lockstep: `y` is the measurement of the
/// current `x` under the last applied input `u`.
struct PlantState {
  Vector x;
  Vector x_hat;
  Vector u;
  Vector y;
  std::uint64_t k = 0;

  static PlantState initial(const PlantModel& model, const Vector& x0);
};

PlantState step_plant(const PlantModel& model, const PlantState& state, const Vector& u, Rng* rng = nullptr);

enum class EstimatorMode { FullObservation, Luenberger };

struct Estimator {
  EstimatorMode mode = EstimatorMode::FullObservation;
  Matrix gain;  // observer gain L (n x p), Luenberger only
};

bool is_observable(const Matrix& A, const Matrix& C);

/// FULL_OBS: returns y. LUENBERGER: A x_hat + B u + L (y - C x_hat - D u),
/// i.e. the one-step-ahead estimate from the measurement of the current state.
Vector estimate(const PlantModel& model, const PlantState& state, const Vector& y, const Vector& u,
                const Estimator& estimator);

/// u = K x_hat.
Vector self_control(const Matrix& gain, const Vector& x_hat);

/// u = sum over j of K_j x_hat_j for every j with a gain entry.
Vector local_control(const std::map<NodeId, Matrix>& gains, const std::map<NodeId, Vector>& estimates);

/// Gains for node `self` under the consensus rule: -eps*deg*I on itself and
/// eps*I on every neighbour.
std::map<NodeId, Matrix> consensus_gains(NodeId self, const std::set<NodeId>& neighbors, double epsilon,
                                         Eigen::Index dim);

struct UniformGain {
  Matrix gain;
};
struct ConsensusGain {
  double epsilon = 0.0;
};
using GainRule = std::variant<UniformGain, ConsensusGain>;

/// Rule lookup for gain design. A partition rule overrides a level rule.
struct GainTemplate {
  std::map<int, GainRule> by_level;
  std::map<std::size_t, GainRule> by_partition;
  std::vector<Partition> partitions;
};

struct PlantDims {
  Eigen::Index states = 1;
  Eigen::Index inputs = 1;
};

struct GainSchedule {
  std::map<std::pair<int, NodeId>, Matrix> gains;  // (level, node) -> self gain
  std::map<NodeId, double> coupling;               // consensus neighbour weight
  std::map<NodeId, std::set<NodeId>> neighborhoods;
  std::uint64_t epoch = 0;

  std::optional<Matrix> self_gain(NodeId node) const;

  /// The {K_j} map local_control expects for `node`.
  std::map<NodeId, Matrix> local_gains(NodeId node) const;
};

GainSchedule design_gains(const Hierarchy& hierarchy, const GainTemplate& rules,
                          const std::map<NodeId, PlantDims>& plants,
                          const std::map<NodeId, std::set<NodeId>>& neighborhoods = {},
                          std::uint64_t previous_epoch = 0);

/// One CONTROL packet per plant carrying its new gain epoch.
std::vector<Packet> gain_broadcast(const GainSchedule& schedule, NodeId from, PacketFactory& factory);

struct MobilityState {
  Vec2 position;
  Vec2 velocity;
};

/// Constant-velocity motion; `dt` in seconds, must be positive.
MobilityState step_mobility(const MobilityState& mob, double dt);

/// Closed-loop plumbing: applies u, advances the plant, refreshes the
/// estimate. A sensor bias, when given, is added to the reported measurement.
struct PlantLoop {
  PlantModel model;
  PlantState state;
  Estimator estimator;

  void step(const Vector& u, Rng* rng = nullptr, const Vector* sensor_bias = nullptr);
};

}  // namespace sdcps
