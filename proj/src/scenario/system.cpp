#include "sdcps/scenario/system.hpp"

#include <chrono>

#include "sdcps/core/error.hpp"

namespace sdcps {

NodeId System::owner_of(NodeId id) const {
  auto local = topo.hierarchy.ancestor_with_role(id, NodeRole::Local);
  return local ? *local : root();
}

void System::sync_tables() {
  for (auto& [id, n] : controllers) {
    if (auto it = sdn.tables().tables.find(id); it != sdn.tables().tables.end()) n.table = it->second;
  }
}

namespace {

PacketScheduler make_inbox(const SystemConfig& config) {
  if (!config.scheduler.source_bins) return PacketScheduler{};
  return PacketScheduler([](const Packet& p) { return static_cast<std::size_t>(p.src.value); });
}

}  // namespace

System setup(const SystemConfig& config) {
  validate_config(config);
  const auto wall_start = std::chrono::steady_clock::now();

  System sys;
  sys.config = config;
  std::uint64_t work = 0;
  auto step = [&](int n, const std::string& what) {
    sys.setup_log.push_back("STEP" + std::to_string(n) + " " + what + " work=" + std::to_string(work));
  };

  // STEP1: the global controller and the vertex set it will manage.
  sys.topo = build_hierarchy(config.n_local, config.switches_per_local, config.hosts_per_switch);
  for (const auto& [a, b] : config.down_links) {
    if (!sys.topo.graph.has_edge(a, b)) {
      throw Error(ErrorCode::ConfigInvalid,
                  "down link " + std::to_string(a.value) + "-" + std::to_string(b.value) + " is not in the topology");
    }
    sys.topo.graph.apply_link_event({LinkChangeKind::Remove, a, b});
  }
  const Hierarchy& h = sys.topo.hierarchy;
  {
    ControllerNode root;
    root.id = h.root();
    root.role = NodeRole::Global;
    sys.controllers.emplace(root.id, std::move(root));
    ++work;
  }
  step(1, "global controller initialized");

  // STEP2: one controller object per vertex.
  for (NodeId id : h.nodes()) {
    sys.controller_list.push_back(id);
    ControllerNode& n = sys.controllers[id];
    n.id = id;
    n.role = h.role(id);
    n.parent = h.parent(id).value_or(kNoNode);
    n.children = h.children(id);
    ++work;
  }
  step(2, "controllers=" + std::to_string(sys.controller_list.size()));

  // STEP3 and STEP4: role lists, partitions and area controllers.
  sys.local_list = sys.topo.locals;
  sys.areas = partition_nodes(sys.local_list, config.partitions);
  for (const Partition& p : sys.areas) {
    sys.super_list.push_back(p.area_coordinator);
    for (NodeId m : p.members) {
      sys.area_of[m] = p.id;
      ++work;
    }
    ++work;
  }
  work += sys.super_list.size() + sys.local_list.size();
  step(3, "super=" + std::to_string(sys.super_list.size()) + " local=" + std::to_string(sys.local_list.size()));
  step(4, "partitions=" + std::to_string(sys.areas.size()));

  // STEP5: configure every unit.
  sys.keys.set_encryption(config.security.encrypt);
  sys.sdn = SdnController(sys.controller_list, config.routing);
  sys.sdn.regenerate_all(sys.topo.graph);
  const std::size_t others = sys.controller_list.size() - 1;
  for (auto& [id, n] : sys.controllers) {
    n.table = sys.sdn.table(id);
    work += n.table.entries.size();
    if (n.table.entries.size() != others) {
      throw Error(ErrorCode::EstablishFailure, "controller " + std::to_string(id.value) + " reaches only " +
                                                   std::to_string(n.table.entries.size()) + " of " +
                                                   std::to_string(others) + " vertices");
    }
    if (n.role == NodeRole::Local) {
      for (NodeId member : h.subtree(id)) {
        if (member == id) continue;
        const DeviceKind kind = h.role(member) == NodeRole::Host ? DeviceKind::Host : DeviceKind::AccessPoint;
        n.devices.register_device({member, kind, DeviceStatus::Ok, {}, SimTime{0}, id});
        ++work;
      }
    }
    n.policies = default_policies();
    work += n.policies.rules.size();
    n.qos = QosRules::defaults();
    work += n.qos.rules.size();
    n.security = SecurityController(config.security.detector);
    ++work;
    n.compute = ComputeController{id};
    ++work;
    const std::string_view role = to_string(n.role);
    n.storage.put("role", std::vector<std::uint8_t>(role.begin(), role.end()));
    ++work;
    n.inbox = make_inbox(config);
    n.established = true;
  }
  if (config.plant) {
    GainTemplate rules;
    rules.by_level[h.level(sys.topo.hosts.front())] = UniformGain{config.plant->gain};
    rules.partitions = sys.areas;
    std::map<NodeId, PlantDims> dims;
    for (NodeId host : sys.topo.hosts) dims[host] = {config.plant->model.states(), config.plant->model.inputs()};
    sys.gains = design_gains(h, rules, dims);
    work += sys.gains.gains.size();
  }
  step(5, "all units established");

  // STEP6: running, and known to the liveness registry.
  for (auto& [id, n] : sys.controllers) {
    if (!n.established) throw Error(ErrorCode::EstablishFailure, "controller " + std::to_string(id.value));
    n.status = ControllerStatus::Running;
    if (n.role != NodeRole::Host) {
      sys.registry.register_controller({id, n.role, h.level(id), SimTime{0}, "ctl-" + std::to_string(id.value)});
    }
    ++work;
  }
  step(6, "running");

  // STEP7: the root collects every image.
  for (const auto& [id, n] : sys.controllers) {
    sys.root_images.emplace(id, capture_image(n, SimTime{0}));
    ++work;
  }
  step(7, "images=" + std::to_string(sys.root_images.size()));

  // STEP8: every controller receives and installs its image.
  for (auto& [id, n] : sys.controllers) {
    restore_image(n, sys.root_images.at(id));
    ++sys.images_forwarded;
    ++work;
  }
  step(8, "forwarded=" + std::to_string(sys.images_forwarded));

  sys.config_work = work;
  sys.config_wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start).count();
  return sys;
}

}  // namespace sdcps
