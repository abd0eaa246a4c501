#include "sdcps/scenario/simulation.hpp"

#include <algorithm>
#include <ranges>
#include <sstream>
#include <tuple>

#include "sdcps/core/error.hpp"
#include "sdcps/middleware/services.hpp"
#include "sdcps/security/crypto.hpp"

namespace sdcps {

namespace {

std::pair<NodeId, NodeId> edge_key(NodeId a, NodeId b) { return std::minmax(a, b); }

std::string subject_of(NodeId host) { return "host-" + std::to_string(host.value); }

}  // namespace

Simulation::Simulation(System& system, std::uint64_t seed, std::ostream* trace_out)
    : sys_(system),
      traffic_rng_(Rng(seed).split(1)),
      attack_rng_(Rng(seed).split(2)),
      plant_rng_(Rng(seed).split(3)),
      trace_(trace_out),
      key_seed_(mix64(seed ^ 0x5DEECE66DULL)) {
  engine_.set_trace(&trace_);
  for (std::size_t i = 0; i < sys_.topo.hosts.size(); ++i) host_index_[sys_.topo.hosts[i]] = i;
  if (const auto& plant = sys_.config.plant) {
    for (NodeId h : sys_.topo.hosts) {
      plants_.emplace(h, PlantLoop{plant->model, PlantState::initial(plant->model, plant->x0), Estimator{}});
    }
  }
  schedule_static_events();
}

void Simulation::schedule_static_events() {
  const SystemConfig& c = sys_.config;
  const NodeId root = sys_.root();
  const std::uint64_t period = c.resilience.heartbeat_period;
  for (const auto& [id, entry] : sys_.registry.entries()) {
    if (!entry.failed) engine_.schedule(SimTime{period}, EventKind::Heartbeat, id, root);
  }
  engine_.schedule(SimTime{period}, EventKind::ControlTick, root, root, std::uint64_t{kLiveness});
  if (c.plant) {
    engine_.schedule(SimTime{c.plant->control_period}, EventKind::ControlTick, root, root, std::uint64_t{kPlant});
    for (NodeId l : sys_.topo.locals) {
      engine_.schedule(SimTime{c.plant->control_period}, EventKind::ControlTick, l, l, std::uint64_t{kPlant});
    }
  }
  for (const FailureSpec& f : c.failures) engine_.schedule(f.at, EventKind::DeviceLeave, f.controller, root);
  for (const AttackSpec& a : c.attacks) {
    if (a.kind == AttackKind::Eavesdrop) record_plaintext_ = true;
    for (Event& e : attack_events(a, factory_, attack_rng_)) {
      if (e.kind == EventKind::PacketSend && a.kind == AttackKind::PacketForge) {
        attack_packets_.emplace(std::get<Packet>(e.payload).id, a.kind);
      }
      engine_.schedule(std::move(e));
    }
  }
}

bool Simulation::dead(NodeId id) const { return sys_.node(id).status == ControllerStatus::Failed; }

int Simulation::capacity(NodeRole role) const {
  const CapacityParams& k = sys_.config.capacity;
  switch (role) {
    case NodeRole::Global: return k.global;
    case NodeRole::Super:
    case NodeRole::AreaCoord:
    case NodeRole::Local: return k.local;
    case NodeRole::Switch: return k.switch_cap;
    case NodeRole::Host: return k.host;
  }
  return 1;
}

NodeId Simulation::pick_destination(NodeId host) {
  const auto& hosts = sys_.topo.hosts;
  const std::size_t self = host_index_.at(host);
  if (sys_.config.traffic.pattern == TrafficPattern::Ring) return hosts[(self + 1) % hosts.size()];
  std::size_t idx = traffic_rng_.uniform_int(hosts.size() - 1);
  if (idx >= self) ++idx;
  return hosts[idx];
}

void Simulation::issue(NodeId host, SimTime t) {
  if (budget_ && stats_.requests_issued >= *budget_) return;
  if (sys_.topo.hosts.size() < 2) return;
  const SystemConfig& c = sys_.config;
  const NodeId dst = pick_destination(host);
  const std::uint64_t id = ++stats_.requests_issued;
  if (c.security.authenticate) sys_.keys.set_key(id, mix64(key_seed_ ^ id));

  ControllerNode& n = sys_.node(host);
  for (int k = 0; k < c.traffic.packets_per_request; ++k) {
    PacketFields f;
    f.src = host;
    f.dst = dst;
    f.flow_id = id;
    f.sender_clock = static_cast<double>(t.ticks);
    f.payload.resize(c.traffic.payload_bytes);
    for (std::size_t i = 0; i < f.payload.size(); i += 8) {
      std::uint64_t r = traffic_rng_.next_u64();
      for (std::size_t b = i; b < std::min(i + 8, f.payload.size()); ++b, r >>= 8) {
        f.payload[b] = static_cast<std::uint8_t>(r);
      }
    }
    Packet p = factory_.make_packet(std::move(f));
    if (record_plaintext_) stats_.plaintext_digests.insert(p.payload_digest);
    if (c.security.authenticate) p = seal(std::move(p), sys_.keys);
    n.inbox.enqueue(std::move(p), t);
  }
  busy_.insert(host);
  outstanding_[host] = id;
  requests_[id] = Request{id, host, dst, t, 0};
  engine_.schedule(t + c.traffic.request_timeout, EventKind::Timeout, host, dst, id);
}

void Simulation::handle(const Event& e, SimTime t) {
  const SystemConfig& c = sys_.config;
  switch (e.kind) {
    case EventKind::PacketArrive:
      arrive(std::get<Packet>(e.payload), e.src, e.dst, t);
      break;
    case EventKind::PacketSend: {
      // Injected traffic enters on the source's uplink without queueing at the source.
      const Packet& p = std::get<Packet>(e.payload);
      ++stats_.attack_packets_sent;
      const auto hop = sys_.node(p.src).table.next_hop(p.dst);
      if (!hop) {
        ++stats_.dropped_unroutable;
      } else {
        arrive(p, p.src, *hop, t);
      }
      break;
    }
    case EventKind::Heartbeat:
      if (!dead(e.src)) {
        sys_.registry.heartbeat(e.src, t);
        engine_.schedule(t + c.resilience.heartbeat_period, EventKind::Heartbeat, e.src, e.dst);
      }
      break;
    case EventKind::ControlTick: {
      const auto code = std::get<std::uint64_t>(e.payload);
      if (code == kLiveness) {
        check_liveness(t);
        engine_.schedule(t + c.resilience.heartbeat_period, EventKind::ControlTick, e.src, e.dst, code);
      } else if (!dead(e.src)) {
        control_plants(e.src, t);
        engine_.schedule(t + c.plant->control_period, EventKind::ControlTick, e.src, e.dst, code);
      }
      break;
    }
    case EventKind::Timeout: {
      const auto id = std::get<std::uint64_t>(e.payload);
      auto it = requests_.find(id);
      if (it == requests_.end()) break;
      const NodeId host = it->second.src;
      requests_.erase(it);
      outstanding_.erase(host);
      ++stats_.requests_lost;
      issue(host, t);
      break;
    }
    case EventKind::DeviceLeave:
      fail(e.src, t);
      break;
    case EventKind::AttackStart: {
      const AttackSpec& a = c.attacks.at(std::get<std::uint64_t>(e.payload) - 1);
      active_attacks_[a.id] = &a;
      if (a.kind == AttackKind::Eavesdrop) taps_.insert(edge_key(a.edge->first, a.edge->second));
      break;
    }
    case EventKind::AttackStop: {
      const AttackSpec& a = c.attacks.at(std::get<std::uint64_t>(e.payload) - 1);
      active_attacks_.erase(a.id);
      if (a.kind == AttackKind::Eavesdrop) taps_.erase(edge_key(a.edge->first, a.edge->second));
      break;
    }
    case EventKind::LinkChange:
    case EventKind::DeviceJoin:
      break;
  }
}

bool Simulation::ingress_check(const Packet& p, NodeId sw, SimTime t) {
  SecurityController& sec = sys_.node(sw).security;
  const bool forged = attack_packets_.contains(p.id);
  const bool keyed =
      sys_.config.security.authenticate && (p.flow_id & kAttackFlowBit) == 0 && sys_.keys.has_key(p.flow_id);
  const bool tag_failed = keyed && !verify_tag(p, sys_.keys);
  sec.observe(p, tag_failed, t);
  security_active_.insert(sw);
  if (tag_failed) {
    ++stats_.dropped_security;
    ++(forged ? stats_.forged_rejected : stats_.sealed_rejected);
    return false;
  }
  if (!sec.admit(p, false, t)) {
    ++stats_.dropped_security;
    return false;
  }
  if (forged) {
    ++stats_.forged_accepted;
  } else if (keyed) {
    ++stats_.sealed_accepted;
  }
  return true;
}

void Simulation::arrive(Packet p, NodeId from, NodeId at, SimTime t) {
  if (dead(at)) {
    ++stats_.dropped_dead;
    for (FailoverRecord& r : stats_.failovers) {
      if (r.failed == at) ++r.packets_dropped;
    }
    return;
  }
  const Hierarchy& h = sys_.topo.hierarchy;
  if (h.role(at) == NodeRole::Switch && h.role(from) == NodeRole::Host && !ingress_check(p, at, t)) return;
  if (p.dst == at) {
    deliver(p, at, t);
    return;
  }
  sys_.node(at).inbox.enqueue(std::move(p), t);
  busy_.insert(at);
}

void Simulation::deliver(const Packet& p, NodeId at, SimTime t) {
  ++stats_.packets_delivered;
  if ((p.flow_id & kAttackFlowBit) != 0) {
    if (p.kind != PacketKind::Service) {
      ++stats_.attack_packets_delivered;
      return;
    }
    ControllerNode& n = sys_.node(at);
    const std::string subject = subject_of(p.src);
    if (n.security.subject_locked(subject, t)) {
      ++stats_.dropped_security;
      return;
    }
    const std::string action(p.payload.begin(), p.payload.end());
    if (check_policy(n.policies, "USER", action, "").effect == Effect::Deny) {
      n.security.record_denial(subject, t);
      security_active_.insert(at);
      ++stats_.denials;
    }
    return;
  }
  if (attack_packets_.contains(p.id)) return;
  auto it = requests_.find(p.flow_id);
  if (it == requests_.end()) return;  // its request already timed out
  if (++it->second.delivered < sys_.config.traffic.packets_per_request) return;
  const NodeId host = it->second.src;
  requests_.erase(it);
  outstanding_.erase(host);
  ++stats_.requests_served;
  ++stats_.served_by_host[host];
  issue(host, t);
}

void Simulation::serve(NodeId id, SimTime t) {
  ControllerNode& n = sys_.node(id);
  if (n.status == ControllerStatus::Failed) {
    busy_.erase(id);
    return;
  }
  const int cap = capacity(n.role);
  const std::uint64_t latency = sys_.config.capacity.link_latency;
  std::vector<Packet> held;
  for (int sent = 0; sent < cap && !n.inbox.empty();) {
    auto p = n.inbox.dispatch(t);
    if (!p) break;
    const auto hop = n.table.next_hop(p->dst);
    if (!hop) {
      ++stats_.dropped_unroutable;
      continue;
    }
    if (dead(*hop)) {
      held.push_back(std::move(*p));  // waits for the tables to route around it
      continue;
    }
    if (--p->ttl <= 0) {
      ++stats_.dropped_ttl;
      continue;
    }
    if (!taps_.empty() && taps_.contains(edge_key(id, *hop))) stats_.tap_digests.push_back(payload_digest(p->payload));
    engine_.schedule(t + latency, EventKind::PacketArrive, id, *hop, std::move(*p));
    ++stats_.packets_forwarded;
    ++sent;
  }
  for (Packet& p : held) n.inbox.enqueue(std::move(p), t);
  if (n.inbox.empty()) busy_.erase(id);
}

void Simulation::fail(NodeId id, SimTime t) {
  ControllerNode& n = sys_.node(id);
  if (n.status == ControllerStatus::Failed) return;
  FailoverRecord r;
  r.failed = id;
  r.failed_at = t;
  r.in_flight_at_failure = outstanding_.size();
  r.packets_dropped = n.inbox.drain().size();
  stats_.dropped_dead += r.packets_dropped;
  n.status = ControllerStatus::Failed;
  busy_.erase(id);
  stats_.failovers.push_back(std::move(r));
}

void Simulation::check_liveness(SimTime t) {
  const ResilienceParams& rp = sys_.config.resilience;
  for (NodeId gone : sys_.registry.check_liveness(t, rp.heartbeat_period, rp.max_missed)) {
    Hierarchy& h = sys_.topo.hierarchy;
    NetGraph& g = sys_.topo.graph;
    const ReassignmentPlan plan = failover(sys_.registry, h, gone, rp.max_missed);

    for (NodeId nb : g.neighbors(gone)) {
      const LinkChange c{LinkChangeKind::Remove, gone, nb};
      g.apply_link_event(c);
      sys_.sdn.on_network_change(g, c);
    }
    for (NodeId moved : plan.moved) {
      if (g.has_edge(plan.adopter, moved)) continue;
      const LinkChange c{LinkChangeKind::Add, plan.adopter, moved, 1.0};
      g.apply_link_event(c);
      sys_.sdn.on_network_change(g, c);
    }
    sys_.sync_tables();

    ControllerNode& adopter = sys_.node(plan.adopter);
    adopter.children = h.children(plan.adopter);
    for (NodeId moved : plan.moved) sys_.node(moved).parent = plan.adopter;
    // Device records come back from the root's copy of the failed image.
    ControllerNode scratch;
    scratch.id = gone;
    restore_image(scratch, sys_.root_images.at(gone));
    for (DeviceRecord rec : scratch.devices.records() | std::views::values) {
      if (adopter.devices.contains(rec.id)) continue;
      rec.owner = plan.adopter;
      adopter.devices.register_device(rec);
    }

    auto rec = std::find_if(stats_.failovers.begin(), stats_.failovers.end(),
                            [&](const FailoverRecord& r) { return r.failed == gone && !r.detected_at; });
    if (rec == stats_.failovers.end()) {
      FailoverRecord fresh;
      fresh.failed = gone;
      fresh.failed_at = t;
      stats_.failovers.push_back(std::move(fresh));
      rec = std::prev(stats_.failovers.end());
    }
    rec->detected_at = t;
    rec->adopter = plan.adopter;
    rec->escalated = plan.escalated;
    rec->moved = plan.moved;
  }
}

void Simulation::control_plants(NodeId controller, SimTime t) {
  const PlantConfig& pc = *sys_.config.plant;
  const PlantModel& m = pc.model;
  const bool noisy = m.process_noise_std > 0.0 || m.measurement_noise_std > 0.0;
  for (NodeId h : sys_.topo.hierarchy.subtree(controller)) {
    auto it = plants_.find(h);
    if (it == plants_.end() || sys_.owner_of(h) != controller) continue;
    PlantLoop& loop = it->second;
    const Vector u_cmd = self_control(*sys_.gains.self_gain(h), loop.state.x_hat);
    Vector u = u_cmd;
    std::optional<Vector> bias;
    bool attacked = false;
    for (const AttackSpec* a : active_attacks_ | std::views::values) {
      if (a->target != h) continue;
      attacked = true;
      if (a->kind == AttackKind::SensorTamper) bias = Vector::Constant(m.outputs(), a->bias);
      if (a->kind == AttackKind::ActuatorTamper) u = Vector::Constant(m.inputs(), a->value);
    }
    const Vector expected = m.C * (m.A * loop.state.x_hat + m.B * u_cmd) + m.D * u_cmd;
    loop.step(u, noisy ? &plant_rng_ : nullptr, bias ? &*bias : nullptr);

    // The actuator echoes what it applied; the sensor is checked against the prediction.
    std::optional<FindingKind> kind;
    double evidence = 0.0;
    if ((u - u_cmd).norm() > pc.tamper_threshold) {
      kind = FindingKind::ActuatorTamper;
      evidence = (u - u_cmd).norm();
    } else if ((loop.state.y - expected).norm() > pc.tamper_threshold) {
      kind = FindingKind::SensorTamper;
      evidence = (loop.state.y - expected).norm();
    }
    // An episode closes once the loop is clean again with no attack running.
    if (!kind && !attacked) {
      tamper_open_.erase({h, FindingKind::SensorTamper});
      tamper_open_.erase({h, FindingKind::ActuatorTamper});
    }
    if (!kind || tamper_open_.contains({h, *kind})) continue;
    tamper_open_.insert({h, *kind});
    Finding f;
    f.kind = *kind;
    f.target = h;
    f.at = t;
    std::ostringstream ev;
    ev << "residual=" << evidence;
    f.evidence = ev.str();
    sys_.node(controller).security.raise(std::move(f));
    security_active_.insert(controller);
    ++stats_.tamper_findings;
  }
}

void Simulation::security_windows(SimTime t) {
  const std::uint64_t w = sys_.config.security.detector.window;
  if (t.ticks / w <= last_window_) return;
  last_window_ = t.ticks / w;
  for (NodeId id : security_active_) {
    SecurityController& sec = sys_.node(id).security;
    sec.advance(t);
    sec.respond(t);
  }
}

template <typename Stop>
void Simulation::loop(SimTime until, Stop stop) {
  if (!started_) {
    started_ = true;
    for (NodeId host : sys_.topo.hosts) issue(host, SimTime{0});
  }
  for (;;) {
    SimTime t = SimTime::max();
    if (!busy_.empty()) t = cursor_;
    if (auto next = engine_.peek_time(); next && *next < t) t = *next;
    if (t == SimTime::max() || t >= until) break;
    tick_ = t;
    cursor_ = t + 1;
    // Arrivals go last and in (node, from, packet) order so that the order
    // nodes were served in on the previous tick cannot matter.
    std::vector<Event> arrivals;
    while (engine_.peek_time() == t) {
      auto [at, e] = engine_.advance();
      if (e.kind == EventKind::PacketArrive) {
        arrivals.push_back(std::move(e));
      } else {
        handle(e, at);
      }
    }
    std::ranges::sort(arrivals, {}, [](const Event& e) {
      return std::tuple{e.dst, e.src, std::get<Packet>(e.payload).id};
    });
    for (const Event& e : arrivals) handle(e, t);
    security_windows(t);
    std::vector<NodeId> ready(busy_.begin(), busy_.end());
    if (reverse_service_) std::ranges::reverse(ready);
    for (NodeId id : ready) serve(id, t);
    if (stop()) break;
  }
}

void Simulation::run_until(SimTime until) {
  loop(until, [] { return false; });
}

bool Simulation::run_requests(std::uint64_t budget, SimTime limit) {
  budget_ = budget;
  auto resolved = [&] { return stats_.requests_served + stats_.requests_lost >= budget; };
  if (budget == 0) return true;
  if (sys_.topo.hosts.size() < 2) return false;
  loop(limit, resolved);
  return resolved();
}

std::map<NodeId, std::vector<Finding>> Simulation::findings() const {
  std::map<NodeId, std::vector<Finding>> out;
  for (const auto& [id, n] : sys_.controllers) {
    if (!n.security.findings().empty()) out[id] = n.security.findings();
  }
  return out;
}

}  // namespace sdcps
