#include "sdcps/plant/plant.hpp"

#include <string>

#include "sdcps/core/error.hpp"

namespace sdcps {

namespace {

std::string dims(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

Vector add_noise(Vector v, double stddev, Rng* rng) {
  if (rng == nullptr || stddev <= 0.0) return v;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += stddev * rng->normal();
  return v;
}

}  // namespace

void PlantModel::validate() const {
  const auto n = A.rows();
  require(A.cols() == n, "A must be square, got " + dims(A));
  require(B.rows() == n, "B rows must match A, got " + dims(B));
  require(C.cols() == n, "C cols must match A, got " + dims(C));
  require(D.rows() == C.rows() && D.cols() == B.cols(), "D must be p x m, got " + dims(D));
  if (process_noise_std < 0.0 || measurement_noise_std < 0.0) {
    throw Error(ErrorCode::DimensionMismatch, "noise standard deviations must be non-negative");
  }
}

PlantModel PlantModel::fully_observed(const Matrix& A, const Matrix& B) {
  PlantModel m;
  m.A = A;
  m.B = B;
  m.C = Matrix::Identity(A.rows(), A.rows());
  m.D = Matrix::Zero(A.rows(), B.cols());
  return m;
}

PlantState PlantState::initial(const PlantModel& model, const Vector& x0) {
  model.validate();
  require(x0.size() == model.states(), "x0 has " + std::to_string(x0.size()) + " entries");
  PlantState s;
  s.x = x0;
  s.u = Vector::Zero(model.inputs());
  s.y = model.C * x0;
  s.x_hat = model.C.rows() == model.states() ? s.y : Vector::Zero(model.states());
  return s;
}

PlantState step_plant(const PlantModel& model, const PlantState& state, const Vector& u, Rng* rng) {
  require(state.x.size() == model.states(), "state has " + std::to_string(state.x.size()) + " entries");
  require(u.size() == model.inputs(), "input has " + std::to_string(u.size()) + " entries");
  PlantState next = state;
  next.x = add_noise(model.A * state.x + model.B * u, model.process_noise_std, rng);
  next.u = u;
  next.y = add_noise(model.C * next.x + model.D * u, model.measurement_noise_std, rng);
  next.k = state.k + 1;
  return next;
}

bool is_observable(const Matrix& A, const Matrix& C) {
  const auto n = A.rows();
  Matrix obs(C.rows() * n, n);
  Matrix block = C;
  for (Eigen::Index i = 0; i < n; ++i) {
    obs.middleRows(i * C.rows(), C.rows()) = block;
    block = block * A;
  }
  return Eigen::FullPivLU<Matrix>(obs).rank() == n;
}

Vector estimate(const PlantModel& model, const PlantState& state, const Vector& y, const Vector& u,
                const Estimator& estimator) {
  require(y.size() == model.outputs(), "measurement has " + std::to_string(y.size()) + " entries");
  if (estimator.mode == EstimatorMode::FullObservation) {
    if (model.outputs() != model.states()) {
      throw Error(ErrorCode::NotObservable, "full observation needs C = I");
    }
    return y;
  }
  if (!is_observable(model.A, model.C)) {
    throw Error(ErrorCode::NotObservable, "observability matrix is rank deficient");
  }
  require(estimator.gain.rows() == model.states() && estimator.gain.cols() == model.outputs(),
          "observer gain must be n x p, got " + dims(estimator.gain));
  require(u.size() == model.inputs(), "input has " + std::to_string(u.size()) + " entries");
  const Vector innovation = y - model.C * state.x_hat - model.D * u;
  return model.A * state.x_hat + model.B * u + estimator.gain * innovation;
}

Vector self_control(const Matrix& gain, const Vector& x_hat) {
  require(gain.cols() == x_hat.size(), "gain " + dims(gain) + " vs estimate of " + std::to_string(x_hat.size()));
  return gain * x_hat;
}

Vector local_control(const std::map<NodeId, Matrix>& gains, const std::map<NodeId, Vector>& estimates) {
  std::optional<Vector> u;
  for (const auto& [j, gain] : gains) {
    auto it = estimates.find(j);
    if (it == estimates.end()) {
      throw Error(ErrorCode::MissingNeighborEstimate, "no estimate for node " + std::to_string(j.value));
    }
    // Start from the first term instead of zero so a lone term is returned
    // unchanged, sign of zero included.
    if (u) {
      require(gain.rows() == u->size(), "gain rows disagree across neighbours");
      *u += self_control(gain, it->second);
    } else {
      u = self_control(gain, it->second);
    }
  }
  if (!u) throw Error(ErrorCode::MissingNeighborEstimate, "empty gain map");
  return *u;
}

std::map<NodeId, Matrix> consensus_gains(NodeId self, const std::set<NodeId>& neighbors, double epsilon,
                                         Eigen::Index dim) {
  std::map<NodeId, Matrix> out;
  const auto degree = static_cast<double>(neighbors.size());
  out[self] = -epsilon * degree * Matrix::Identity(dim, dim);
  for (NodeId j : neighbors) {
    if (j != self) out[j] = epsilon * Matrix::Identity(dim, dim);
  }
  return out;
}

std::optional<Matrix> GainSchedule::self_gain(NodeId node) const {
  for (const auto& [key, gain] : gains) {
    if (key.second == node) return gain;
  }
  return std::nullopt;
}

std::map<NodeId, Matrix> GainSchedule::local_gains(NodeId node) const {
  std::map<NodeId, Matrix> out;
  const auto self = self_gain(node);
  if (!self) throw Error(ErrorCode::UncoveredPlant, "no gain for node " + std::to_string(node.value));
  out[node] = *self;
  auto c = coupling.find(node);
  auto nb = neighborhoods.find(node);
  if (c != coupling.end() && nb != neighborhoods.end()) {
    const auto dim = self->cols();
    for (NodeId j : nb->second) {
      if (j != node) out[j] = c->second * Matrix::Identity(dim, dim);
    }
  }
  return out;
}

GainSchedule design_gains(const Hierarchy& hierarchy, const GainTemplate& rules,
                          const std::map<NodeId, PlantDims>& plants,
                          const std::map<NodeId, std::set<NodeId>>& neighborhoods, std::uint64_t previous_epoch) {
  std::map<NodeId, std::size_t> partition_of;
  for (const Partition& part : rules.partitions) {
    for (NodeId member : part.members) partition_of[member] = part.id;
  }

  GainSchedule schedule;
  schedule.epoch = previous_epoch + 1;
  schedule.neighborhoods = neighborhoods;
  for (const auto& [node, d] : plants) {
    const int level = hierarchy.contains(node) ? hierarchy.level(node) : 0;
    const GainRule* rule = nullptr;
    if (hierarchy.contains(node)) {
      if (auto local = hierarchy.ancestor_with_role(node, NodeRole::Local)) {
        auto p = partition_of.find(*local);
        if (p != partition_of.end()) {
          auto r = rules.by_partition.find(p->second);
          if (r != rules.by_partition.end()) rule = &r->second;
        }
      }
    }
    if (rule == nullptr) {
      auto r = rules.by_level.find(level);
      if (r != rules.by_level.end()) rule = &r->second;
    }
    if (rule == nullptr) {
      throw Error(ErrorCode::UncoveredPlant, "no gain rule covers node " + std::to_string(node.value));
    }

    if (const auto* uniform = std::get_if<UniformGain>(rule)) {
      require(uniform->gain.rows() == d.inputs && uniform->gain.cols() == d.states,
              "uniform gain " + dims(uniform->gain) + " does not fit plant " + std::to_string(node.value));
      schedule.gains[{level, node}] = uniform->gain;
    } else {
      const auto& consensus = std::get<ConsensusGain>(*rule);
      require(d.inputs == d.states, "consensus rule needs m == n");
      std::set<NodeId> nbrs;
      if (auto it = neighborhoods.find(node); it != neighborhoods.end()) nbrs = it->second;
      schedule.gains[{level, node}] = consensus_gains(node, nbrs, consensus.epsilon, d.states).at(node);
      schedule.coupling[node] = consensus.epsilon;
    }
  }
  return schedule;
}

std::vector<Packet> gain_broadcast(const GainSchedule& schedule, NodeId from, PacketFactory& factory) {
  std::vector<Packet> out;
  for (const auto& [key, gain] : schedule.gains) {
    PacketFields f;
    f.src = from;
    f.dst = key.second;
    f.kind = PacketKind::Control;
    f.priority = 2;
    f.flow_id = schedule.epoch;
    const auto epoch = schedule.epoch;
    for (int b = 0; b < 8; ++b) f.payload.push_back(static_cast<std::uint8_t>(epoch >> (8 * b)));
    out.push_back(factory.make_packet(std::move(f)));
  }
  return out;
}

MobilityState step_mobility(const MobilityState& mob, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::BadValue, "dt must be positive");
  return {mob.position + mob.velocity * dt, mob.velocity};
}

void PlantLoop::step(const Vector& u, Rng* rng, const Vector* sensor_bias) {
  std::optional<Vector> predicted;
  if (estimator.mode == EstimatorMode::Luenberger) predicted = estimate(model, state, state.y, u, estimator);
  state = step_plant(model, state, u, rng);
  if (sensor_bias != nullptr) state.y += *sensor_bias;
  state.x_hat = predicted ? *predicted : estimate(model, state, state.y, u, estimator);
}

}  // namespace sdcps
