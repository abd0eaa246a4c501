#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sdcps/control/controller.hpp"
#include "sdcps/control/routing.hpp"
#include "sdcps/middleware/services.hpp"
#include "sdcps/plant/plant.hpp"
#include "sdcps/scenario/config.hpp"
#include "sdcps/security/crypto.hpp"
#include "sdcps/topology/hierarchy.hpp"
#include "sdcps/topology/partition.hpp"

namespace sdcps {

/// A configured, running controller hierarchy.
struct System {
  SystemConfig config;
  BuiltTopology topo;

  std::vector<NodeId> controller_list;  // every vertex, ascending
  std::vector<NodeId> super_list;       // partition coordinators
  std::vector<NodeId> local_list;
  std::vector<Partition> areas;         // one area controller per partition
  std::map<NodeId, std::size_t> area_of;

  std::map<NodeId, ControllerNode> controllers;
  ControllerRegistry registry;
  SdnController sdn{{}};
  KeyRing keys;
  GainSchedule gains;

  std::map<NodeId, ControllerImage> root_images;  // held by the global controller
  std::uint64_t images_forwarded = 0;

  std::uint64_t config_work = 0;
  double config_wall_ms = 0.0;
  std::vector<std::string> setup_log;  // one line per step

  NodeId root() const { return topo.hierarchy.root(); }
  ControllerNode& node(NodeId id) { return controllers.at(id); }
  const ControllerNode& node(NodeId id) const { return controllers.at(id); }

  /// Nearest LOCAL ancestor of a host or switch.
  NodeId owner_of(NodeId id) const;

  /// Copies the SDN unit's current tables into every controller node.
  void sync_tables();
};

/// Bring-up in eight steps: initialize the global controller, create a
/// controller object per vertex, form the role lists, partition the locals
/// and assign area controllers, configure every unit until established,
/// switch to RUNNING, capture every image at the root and redistribute
/// them. Throws ConfigInvalid or EstablishFailure.
System setup(const SystemConfig& config);

}  // namespace sdcps
