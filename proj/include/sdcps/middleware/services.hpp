#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdcps/core/types.hpp"
#include "sdcps/topology/graph.hpp"
#include "sdcps/topology/hierarchy.hpp"

namespace sdcps {

// ---- time translation and synchronization ---------------------------------

/// c(t) = skew * t + offset, plus the node's current estimates of both.
struct AffineClock {
  double skew = 1.0;
  double offset = 0.0;
  std::optional<double> skew_est;
  std::optional<double> offset_est;

  double read(double reference_time) const { return skew * reference_time + offset; }
};

/// Sender-clock timestamp to reference time: (remote - offset_est) / skew_est.
double translate_time(const AffineClock& sender, double remote_ts);

/// Reference time to the receiver's clock using its estimates.
double to_local(const AffineClock& receiver, double reference_ts);

/// Least-squares slope through (reference, local) timestamp pairs.
double estimate_skew(std::span<const std::pair<double, double>> samples);

/// One synchronous round. Skew estimates come from a two-sample regression of
/// each clock at `round_time` and `round_time + probe_gap`. Offset estimates
/// update as b_i += eta / (|N_i| + 1) * sum_j (b_j - b_i). Missing offset
/// estimates start at the node's own offset.
void sync_round(std::map<NodeId, AffineClock>& clocks, const NetGraph& graph, double eta, double round_time = 0.0,
                double probe_gap = 1000.0);

/// max - min of the offset estimates.
double offset_spread(const std::map<NodeId, AffineClock>& clocks);

// ---- position tracking and speed stamping ---------------------------------

struct Track {
  NodeId node;
  Vec2 position;
  Vec2 velocity;  // m/s
  SimTime stamp;
};

class PositionTracker {
 public:
  /// Records a fix. Without an explicit velocity the speed stamp is derived
  /// from the previous fix of the same node.
  const Track& update(NodeId node, Vec2 position, SimTime at, std::optional<Vec2> velocity = std::nullopt);

  const Track& track(NodeId node) const;
  bool has(NodeId node) const { return tracks_.contains(node); }

 private:
  std::map<NodeId, Track> tracks_;
};

/// position + velocity * horizon; rejects tracks older than `staleness_ticks`.
Vec2 predict_position(const Track& track, double horizon_s, SimTime now, std::uint64_t staleness_ticks);

// ---- controller registration, messaging, failover --------------------------

struct RegistryEntry {
  NodeId id;
  NodeRole role = NodeRole::Local;
  int layer = 0;
  SimTime last_heartbeat;
  std::string address;
  bool failed = false;
  int missed = 0;
};

class ControllerRegistry {
 public:
  void register_controller(RegistryEntry entry);
  bool contains(NodeId id) const { return entries_.contains(id); }
  const RegistryEntry& entry(NodeId id) const;
  const std::map<NodeId, RegistryEntry>& entries() const { return entries_; }

  void heartbeat(NodeId id, SimTime now);

  /// Sets each live controller's miss count to the whole heartbeat periods
  /// elapsed since its last beat; returns those at or past `max_missed`.
  std::vector<NodeId> check_liveness(SimTime now, std::uint64_t period, int max_missed);

  void mark_failed(NodeId id);

 private:
  std::map<NodeId, RegistryEntry> entries_;
};

struct Delivery {
  std::vector<NodeId> path;
  std::size_t hops = 0;
  bool east_west = false;
};

/// Same-layer messages go peer to peer in one logical hop; everything else
/// follows the tree path.
Delivery route_message(const ControllerRegistry& registry, const Hierarchy& hierarchy, NodeId from, NodeId to,
                       bool same_layer);

struct ReassignmentPlan {
  NodeId failed;
  NodeId adopter;
  std::vector<NodeId> moved;
  bool escalated = false;  // no live sibling; the parent adopted
};

/// Hands the children of `failed` to its least-loaded live sibling (ties to
/// the lowest id), or to its parent when there is none. `loads` defaults to
/// child counts for controllers it does not mention. Marks the registry entry
/// failed and rewires `hierarchy`.
ReassignmentPlan failover(ControllerRegistry& registry, Hierarchy& hierarchy, NodeId failed, int max_missed,
                          const std::map<NodeId, std::size_t>& loads = {});

/// Every host owned (nearest LOCAL ancestor) by a live controller.
bool ownership_total(const Hierarchy& hierarchy, const ControllerRegistry& registry);

// ---- resource tracking -----------------------------------------------------

struct ResourceReport {
  NodeId controller;
  double cpu_used = 0.0;
  double cpu_capacity = 0.0;
  double mem_used = 0.0;
  double mem_capacity = 0.0;
  std::size_t tasks = 0;
};

struct ResourceView {
  std::map<NodeId, ResourceReport> by_controller;
  std::size_t total_tasks = 0;

  std::optional<NodeId> least_loaded() const;
};

ResourceView track_system_resources(std::span<const ResourceReport> reports);

}  // namespace sdcps
