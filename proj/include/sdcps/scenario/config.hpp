#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdcps/control/routing.hpp"
#include "sdcps/plant/plant.hpp"
#include "sdcps/security/attack.hpp"
#include "sdcps/security/defense.hpp"

namespace sdcps {

/// Packets each node forwards per tick, by role.
struct CapacityParams {
  int global = 6;
  int local = 2;
  int switch_cap = 1;
  int host = 1;
  std::uint64_t link_latency = 1;

  friend bool operator==(const CapacityParams&, const CapacityParams&) = default;
};

enum class TrafficPattern { Uniform, Ring };

std::string_view to_string(TrafficPattern p);

struct TrafficParams {
  int packets_per_request = 8;
  std::uint64_t request_timeout = 2000;
  TrafficPattern pattern = TrafficPattern::Uniform;
  std::uint32_t payload_bytes = 16;

  friend bool operator==(const TrafficParams&, const TrafficParams&) = default;
};

struct SchedulerParams {
  bool source_bins = true;  // round-robin across originating hosts

  friend bool operator==(const SchedulerParams&, const SchedulerParams&) = default;
};

struct ResilienceParams {
  std::uint64_t heartbeat_period = 20;
  int max_missed = 3;

  friend bool operator==(const ResilienceParams&, const ResilienceParams&) = default;
};

struct SecurityParams {
  // A host forwards one packet per tick, so legitimate traffic stays under
  // 50 per (src, dst) per window.
  DetectorParams detector{.theta = 60};
  bool authenticate = false;  // seal data flows and verify at ingress
  bool encrypt = false;

  friend bool operator==(const SecurityParams& a, const SecurityParams& b) {
    return a.detector.theta == b.detector.theta && a.detector.window == b.detector.window &&
           a.detector.denials == b.detector.denials && a.detector.cooldown == b.detector.cooldown &&
           a.authenticate == b.authenticate && a.encrypt == b.encrypt;
  }
};

/// One LTI plant per host, driven by its owning local controller.
struct PlantConfig {
  PlantModel model;
  Vector x0;
  Matrix gain;  // inputs x states
  std::uint64_t control_period = 100;
  double tamper_threshold = 0.5;
};

struct FailureSpec {
  NodeId controller;
  SimTime at;

  friend bool operator==(const FailureSpec&, const FailureSpec&) = default;
};

enum class ScenarioId { Sc1, Sc2, Sc3, Sc4 };

std::string_view to_string(ScenarioId id);
ScenarioId scenario_id_from_string(std::string_view s);  // throws BadValue

/// One row of the experiment matrix. Sc1 sweeps n_local and Sc2
/// hosts_per_switch under a request budget; Sc3 sweeps simulated time on a
/// fixed topology; Sc4 sweeps (n_local, hosts_per_switch) pairs at a fixed
/// simulated time.
struct ScenarioSpec {
  ScenarioId id = ScenarioId::Sc1;
  std::vector<int> values;
  std::vector<std::uint64_t> sim_times;
  std::vector<std::pair<int, int>> pairs;
  std::uint64_t requests = 10000;
  std::uint64_t sim_time = 10000;
  std::uint64_t time_limit = 5'000'000;  // safety cap for request-budget runs
  std::vector<std::uint64_t> seeds{1};

  static ScenarioSpec defaults(ScenarioId id);

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

struct SystemConfig {
  int n_local = 8;
  int switches_per_local = 2;
  int hosts_per_switch = 8;
  int partitions = 1;
  std::uint64_t seed = 1;
  RoutePolicy routing = RoutePolicy::Shortest;

  CapacityParams capacity;
  TrafficParams traffic;
  SchedulerParams scheduler;
  ResilienceParams resilience;
  SecurityParams security;
  std::optional<PlantConfig> plant;

  std::vector<AttackSpec> attacks;
  std::vector<FailureSpec> failures;
  std::vector<std::pair<NodeId, NodeId>> down_links;

  std::map<ScenarioId, ScenarioSpec> scenarios;  // overrides of the defaults

  /// Vertex count of the built topology.
  std::uint32_t vertex_count() const;

  /// The configured spec for `id`, or the defaults.
  ScenarioSpec scenario(ScenarioId id) const;
};

/// Scalar plant x' = 0.9x + u under u = -0.5x.
PlantConfig default_plant();

/// Throws ConfigInvalid naming the first violated rule.
void validate_config(const SystemConfig& config);

/// Throws ConfigInvalid when the spec does not have its row's shape.
void validate_scenario(const ScenarioSpec& spec);

/// JSON document (see docs/config.md). Unknown keys, wrong types and rule
/// violations throw ConfigInvalid.
SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of every field; parse_config(config_to_json(c)) == c for
/// the comparable fields.
std::string config_to_json(const SystemConfig& config);

}  // namespace sdcps
