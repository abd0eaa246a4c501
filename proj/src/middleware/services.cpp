#include "sdcps/middleware/services.hpp"

#include <algorithm>
#include <limits>

#include "sdcps/core/error.hpp"

namespace sdcps {

double translate_time(const AffineClock& sender, double remote_ts) {
  if (!sender.skew_est || !sender.offset_est) throw Error(ErrorCode::Unsynchronized, "sender has no clock estimate");
  return (remote_ts - *sender.offset_est) / *sender.skew_est;
}

double to_local(const AffineClock& receiver, double reference_ts) {
  if (!receiver.skew_est || !receiver.offset_est) {
    throw Error(ErrorCode::Unsynchronized, "receiver has no clock estimate");
  }
  return *receiver.skew_est * reference_ts + *receiver.offset_est;
}

double estimate_skew(std::span<const std::pair<double, double>> samples) {
  if (samples.size() < 2) return 1.0;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : samples) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(samples.size());
  my /= static_cast<double>(samples.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [x, y] : samples) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxx == 0.0 ? 1.0 : sxy / sxx;
}

void sync_round(std::map<NodeId, AffineClock>& clocks, const NetGraph& graph, double eta, double round_time,
                double probe_gap) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::BadValue, "eta must lie in (0, 1]");
  for (auto& [id, c] : clocks) {
    const std::pair<double, double> probes[] = {{round_time, c.read(round_time)},
                                                {round_time + probe_gap, c.read(round_time + probe_gap)}};
    c.skew_est = estimate_skew(probes);
    if (!c.offset_est) c.offset_est = c.offset;
  }
  // Synchronous: every update reads the previous round's estimates.
  std::map<NodeId, double> next;
  for (const auto& [id, c] : clocks) {
    double sum = 0.0;
    std::size_t deg = 0;
    if (graph.has_vertex(id)) {
      for (NodeId j : graph.neighbors(id)) {
        auto it = clocks.find(j);
        if (it == clocks.end()) continue;
        sum += *it->second.offset_est - *c.offset_est;
        ++deg;
      }
    }
    next[id] = *c.offset_est + eta * sum / static_cast<double>(deg + 1);
  }
  for (auto& [id, c] : clocks) c.offset_est = next[id];
}

double offset_spread(const std::map<NodeId, AffineClock>& clocks) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [id, c] : clocks) {
    const double b = c.offset_est.value_or(c.offset);
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  return clocks.empty() ? 0.0 : hi - lo;
}

const Track& PositionTracker::update(NodeId node, Vec2 position, SimTime at, std::optional<Vec2> velocity) {
  auto it = tracks_.find(node);
  Vec2 v{};
  if (velocity) {
    v = *velocity;
  } else if (it != tracks_.end() && at > it->second.stamp) {
    const double dt = static_cast<double>(at.ticks - it->second.stamp.ticks) / 1000.0;
    v = {(position.x - it->second.position.x) / dt, (position.y - it->second.position.y) / dt};
  } else if (it != tracks_.end()) {
    v = it->second.velocity;
  }
  Track& t = tracks_[node];
  t = Track{node, position, v, at};
  return t;
}

const Track& PositionTracker::track(NodeId node) const {
  auto it = tracks_.find(node);
  if (it == tracks_.end()) throw Error(ErrorCode::UnknownNode, "no track for node");
  return it->second;
}

Vec2 predict_position(const Track& track, double horizon_s, SimTime now, std::uint64_t staleness_ticks) {
  if (now.ticks > track.stamp.ticks && now.ticks - track.stamp.ticks > staleness_ticks) {
    throw Error(ErrorCode::StaleTrack, "track age exceeds staleness bound");
  }
  return track.position + track.velocity * horizon_s;
}

void ControllerRegistry::register_controller(RegistryEntry entry) {
  if (entries_.contains(entry.id)) {
    throw Error(ErrorCode::DuplicateController, "controller " + std::to_string(entry.id.value));
  }
  entries_.emplace(entry.id, std::move(entry));
}

const RegistryEntry& ControllerRegistry::entry(NodeId id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownEndpoint, "controller " + std::to_string(id.value));
  return it->second;
}

void ControllerRegistry::heartbeat(NodeId id, SimTime now) {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownEndpoint, "controller " + std::to_string(id.value));
  if (it->second.failed) return;
  it->second.last_heartbeat = std::max(it->second.last_heartbeat, now);
  it->second.missed = 0;
}

std::vector<NodeId> ControllerRegistry::check_liveness(SimTime now, std::uint64_t period, int max_missed) {
  std::vector<NodeId> dead;
  for (auto& [id, e] : entries_) {
    if (e.failed || now <= e.last_heartbeat) continue;
    e.missed = static_cast<int>((now.ticks - e.last_heartbeat.ticks) / period);
    if (e.missed >= max_missed) dead.push_back(id);
  }
  return dead;
}

void ControllerRegistry::mark_failed(NodeId id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::UnknownEndpoint, "controller " + std::to_string(id.value));
  it->second.failed = true;
}

Delivery route_message(const ControllerRegistry& registry, const Hierarchy& hierarchy, NodeId from, NodeId to,
                       bool same_layer) {
  if (!registry.contains(from) || !hierarchy.contains(from)) {
    throw Error(ErrorCode::UnknownEndpoint, "sender " + std::to_string(from.value));
  }
  if (!registry.contains(to) || !hierarchy.contains(to)) {
    throw Error(ErrorCode::UnknownEndpoint, "receiver " + std::to_string(to.value));
  }
  Delivery d;
  if (from == to) {
    d.path = {from};
    return d;
  }
  if (same_layer && hierarchy.level(from) == hierarchy.level(to)) {
    d.path = {from, to};
    d.hops = 1;
    d.east_west = true;
    return d;
  }
  const auto up = hierarchy.path_to_root(from);
  const auto down = hierarchy.path_to_root(to);
  // Lowest common ancestor: first node of `up` that also lies on `down`.
  std::size_t i = 0;
  auto in_down = [&](NodeId n) { return std::find(down.begin(), down.end(), n) != down.end(); };
  while (!in_down(up[i])) ++i;
  d.path.assign(up.begin(), up.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  auto lca = std::find(down.begin(), down.end(), up[i]);
  for (auto it = std::make_reverse_iterator(lca); it != down.rend(); ++it) d.path.push_back(*it);
  d.hops = d.path.size() - 1;
  return d;
}

ReassignmentPlan failover(ControllerRegistry& registry, Hierarchy& hierarchy, NodeId failed, int max_missed,
                          const std::map<NodeId, std::size_t>& loads) {
  const RegistryEntry& e = registry.entry(failed);
  if (!e.failed && e.missed < max_missed) {
    throw Error(ErrorCode::InvalidTransition, "controller " + std::to_string(failed.value) + " is still live");
  }
  const auto parent = hierarchy.parent(failed);
  if (!parent) throw Error(ErrorCode::NoSibling, "root controller has no sibling or parent");

  auto load_of = [&](NodeId n) {
    auto it = loads.find(n);
    return it != loads.end() ? it->second : hierarchy.children(n).size();
  };
  auto live = [&](NodeId n) { return registry.contains(n) && !registry.entry(n).failed && n != failed; };

  ReassignmentPlan plan{failed, kNoNode, hierarchy.children(failed), false};
  const NodeRole role = hierarchy.role(failed);
  for (NodeId s : hierarchy.children(*parent)) {
    if (!live(s) || hierarchy.role(s) != role) continue;
    if (plan.adopter == kNoNode || load_of(s) < load_of(plan.adopter)) plan.adopter = s;
  }
  if (plan.adopter == kNoNode) {
    // Walk up until a live ancestor is found.
    NodeId up = *parent;
    while (!live(up)) {
      const auto next = hierarchy.parent(up);
      if (!next) throw Error(ErrorCode::NoSibling, "no live ancestor can adopt");
      up = *next;
    }
    plan.adopter = up;
    plan.escalated = true;
  }
  registry.mark_failed(failed);
  for (NodeId c : plan.moved) hierarchy.reparent(c, plan.adopter);
  return plan;
}

bool ownership_total(const Hierarchy& hierarchy, const ControllerRegistry& registry) {
  for (NodeId h : hierarchy.nodes_with_role(NodeRole::Host)) {
    std::optional<NodeId> owner;
    for (NodeId a : hierarchy.path_to_root(h)) {
      const NodeRole r = hierarchy.role(a);
      if (r == NodeRole::Host || r == NodeRole::Switch) continue;
      owner = a;
      break;
    }
    if (!owner || !registry.contains(*owner) || registry.entry(*owner).failed) return false;
  }
  return true;
}

std::optional<NodeId> ResourceView::least_loaded() const {
  std::optional<NodeId> best;
  for (const auto& [id, r] : by_controller) {
    if (!best || r.tasks < by_controller.at(*best).tasks) best = id;
  }
  return best;
}

ResourceView track_system_resources(std::span<const ResourceReport> reports) {
  ResourceView view;
  for (const ResourceReport& r : reports) {
    auto [it, fresh] = view.by_controller.try_emplace(r.controller, r);
    if (!fresh) {
      view.total_tasks -= it->second.tasks;
      it->second = r;
    }
    view.total_tasks += r.tasks;
  }
  return view;
}

}  // namespace sdcps
