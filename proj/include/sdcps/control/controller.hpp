#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sdcps/control/routing.hpp"
#include "sdcps/control/units.hpp"
#include "sdcps/core/types.hpp"
#include "sdcps/middleware/scheduler.hpp"
#include "sdcps/security/defense.hpp"
#include "sdcps/security/policy.hpp"
#include "sdcps/topology/hierarchy.hpp"

namespace sdcps {

enum class ControllerStatus { Init, Running, Failed };

std::string_view to_string(ControllerStatus s);

/// One software-defined controller with its sub-controllers and shared
/// units. `table` is the SDN unit's forwarding table for this node.
struct ControllerNode {
  NodeId id;
  NodeRole role = NodeRole::Local;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;

  ForwardingTable table;
  DeviceRegistry devices;
  SecurityController security;
  ComputeController compute;
  StorageController storage;
  QosRules qos = QosRules::defaults();
  PolicySet policies = default_policies();
  AggregateUnit aggregate;
  PacketScheduler inbox;

  ControllerStatus status = ControllerStatus::Init;
  bool established = false;
};

struct ControllerImage {
  NodeId controller;
  SimTime captured_at;
  std::string bytes;  // canonical JSON

  friend bool operator==(const ControllerImage&, const ControllerImage&) = default;
};

/// Canonical serialization of every sub-controller table (inbox and
/// transient counters excluded). Throws DeadController for FAILED nodes.
ControllerImage capture_image(const ControllerNode& node, SimTime now);

/// Replaces the node's tables with the image contents. Throws ImageMismatch
/// when the image belongs to another controller or does not parse.
void restore_image(ControllerNode& node, const ControllerImage& image);

enum class DecisionOutcome { Granted, Denied, Escalated, Timeout };

std::string_view to_string(DecisionOutcome o);

struct Request {
  std::uint64_t id = 0;
  NodeId origin;                  // controller that received it
  std::vector<NodeId> entities;   // devices, hosts or controllers it touches
  std::string subject_role = "CONTROLLER";
  std::string action = "actuate";
  std::string object;
  std::map<std::string, double> state;
};

struct Decision {
  std::uint64_t request = 0;
  DecisionOutcome outcome = DecisionOutcome::Denied;
  NodeId decided_by = kNoNode;
  int depth = 0;
  std::string reason;
  SimTime at;
};

struct DecisionParams {
  std::uint64_t hop_timeout = 50;
  std::uint64_t hop_latency = 1;
  std::map<NodeId, std::uint64_t> latency_to_parent;  // overrides per node
};

/// A controller decides by itself when every entity lies in its subtree and
/// one of its policy rules matches; otherwise the request climbs one level.
/// The root decides or denies as unresolvable. A hop slower than the timeout
/// ends in TIMEOUT. Writes `tick,request,outcome,decider,depth` lines,
/// including one ESCALATED line per hop. Throws DeadController when the
/// receiving controller or a parent on the way is FAILED.
Decision handle_request(const Hierarchy& hierarchy, const std::map<NodeId, ControllerNode>& controllers,
                        const Request& request, SimTime now, const DecisionParams& params = {},
                        std::ostream* log = nullptr);

}  // namespace sdcps
