#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <utility>
#include <vector>

#include "sdcps/core/engine.hpp"
#include "sdcps/core/rng.hpp"
#include "sdcps/plant/plant.hpp"
#include "sdcps/scenario/system.hpp"

namespace sdcps {

struct FailoverRecord {
  NodeId failed;
  SimTime failed_at;
  std::uint64_t in_flight_at_failure = 0;
  std::uint64_t packets_dropped = 0;
  std::optional<SimTime> detected_at;
  NodeId adopter = kNoNode;
  bool escalated = false;
  std::vector<NodeId> moved;
};

struct SimStats {
  std::uint64_t requests_issued = 0;
  std::uint64_t requests_served = 0;
  std::uint64_t requests_lost = 0;
  std::map<NodeId, std::uint64_t> served_by_host;

  std::uint64_t packets_forwarded = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t dropped_dead = 0;
  std::uint64_t dropped_unroutable = 0;
  std::uint64_t dropped_ttl = 0;
  std::uint64_t dropped_security = 0;

  std::uint64_t sealed_accepted = 0;
  std::uint64_t sealed_rejected = 0;
  std::uint64_t forged_rejected = 0;
  std::uint64_t forged_accepted = 0;
  std::uint64_t attack_packets_sent = 0;
  std::uint64_t attack_packets_delivered = 0;
  std::uint64_t denials = 0;
  std::uint64_t tamper_findings = 0;

  std::vector<std::uint64_t> tap_digests;       // payload digests seen on tapped edges
  std::set<std::uint64_t> plaintext_digests;    // recorded only while a tap is configured

  std::vector<FailoverRecord> failovers;
};

/// Packet-level run of a configured system. Hosts issue one request (a flow
/// of `packets_per_request` DATA packets to another host) at a time and issue
/// the next when it completes or times out. Every node forwards up to its
/// role capacity per tick along its forwarding table; a hop takes
/// `link_latency` ticks. Heartbeats, liveness checks, failures, attacks and
/// plant control run as engine events, and every delivered event feeds the
/// trace digest.
class Simulation {
 public:
  Simulation(System& system, std::uint64_t seed, std::ostream* trace_out = nullptr);

  /// Processes every tick before `until`.
  void run_until(SimTime until);

  /// Issues exactly `budget` requests in total and runs until each is served
  /// or lost, or `limit` is reached. Returns whether all were resolved.
  bool run_requests(std::uint64_t budget, SimTime limit);

  /// Serves busy nodes in descending id order within a tick. Results do not
  /// depend on it; the option exists to check that.
  void set_reverse_service_order(bool on) { reverse_service_ = on; }

  /// Last processed tick.
  SimTime now() const { return tick_; }
  const SimStats& stats() const { return stats_; }
  std::uint64_t trace_digest() const { return trace_.digest(); }
  std::uint64_t trace_lines() const { return trace_.lines(); }
  std::uint64_t in_flight() const { return outstanding_.size(); }
  const System& system() const { return sys_; }

  /// Plant of `host`, when plants are configured.
  const PlantLoop& plant(NodeId host) const { return plants_.at(host); }

  /// Findings raised anywhere in the hierarchy, by controller.
  std::map<NodeId, std::vector<Finding>> findings() const;

 private:
  struct Request {
    std::uint64_t id = 0;
    NodeId src;
    NodeId dst;
    SimTime issued;
    int delivered = 0;
  };

  enum TickCode : std::uint64_t { kLiveness = 0, kPlant = 1 };

  void schedule_static_events();
  void issue(NodeId host, SimTime t);
  void handle(const Event& e, SimTime t);
  void arrive(Packet p, NodeId from, NodeId at, SimTime t);
  void deliver(const Packet& p, NodeId at, SimTime t);
  bool ingress_check(const Packet& p, NodeId sw, SimTime t);
  void serve(NodeId id, SimTime t);
  void fail(NodeId id, SimTime t);
  void check_liveness(SimTime t);
  void control_plants(NodeId controller, SimTime t);
  void security_windows(SimTime t);
  int capacity(NodeRole role) const;
  bool dead(NodeId id) const;
  NodeId pick_destination(NodeId host);

  template <typename Stop>
  void loop(SimTime until, Stop stop);

  System& sys_;
  Rng traffic_rng_;
  Rng attack_rng_;
  Rng plant_rng_;
  Engine engine_;
  EventTrace trace_;
  PacketFactory factory_;
  SimStats stats_;
  std::uint64_t key_seed_;
  SimTime tick_;
  SimTime cursor_;
  bool started_ = false;
  bool reverse_service_ = false;

  std::optional<std::uint64_t> budget_;
  std::map<NodeId, std::uint64_t> outstanding_;  // host -> request id
  std::map<std::uint64_t, Request> requests_;    // unresolved only
  std::set<NodeId> busy_;
  std::map<NodeId, std::size_t> host_index_;

  std::map<std::uint64_t, AttackKind> attack_packets_;  // packet id -> kind, forgeries only
  std::map<std::uint64_t, const AttackSpec*> active_attacks_;
  std::set<std::pair<NodeId, NodeId>> taps_;
  bool record_plaintext_ = false;

  std::map<NodeId, PlantLoop> plants_;
  std::set<std::pair<NodeId, FindingKind>> tamper_open_;
  std::set<NodeId> security_active_;
  std::uint64_t last_window_ = 0;
};

}  // namespace sdcps
