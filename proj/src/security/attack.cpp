#include "sdcps/security/attack.hpp"

#include <array>
#include <cmath>

#include "sdcps/core/error.hpp"

namespace sdcps {

namespace {

constexpr std::array<std::pair<AttackKind, std::string_view>, 7> kNames{{
    {AttackKind::DosFlood, "DOS_FLOOD"},
    {AttackKind::DdosFlood, "DDOS_FLOOD"},
    {AttackKind::PacketForge, "PACKET_FORGE"},
    {AttackKind::Eavesdrop, "EAVESDROP"},
    {AttackKind::UserPrivEsc, "USER_PRIV_ESC"},
    {AttackKind::SensorTamper, "SENSOR_TAMPER"},
    {AttackKind::ActuatorTamper, "ACTUATOR_TAMPER"},
}};

bool packet_based(AttackKind k) {
  return k == AttackKind::DosFlood || k == AttackKind::DdosFlood || k == AttackKind::PacketForge ||
         k == AttackKind::UserPrivEsc;
}

void invalid(const AttackSpec& spec, const std::string& why) {
  throw Error(ErrorCode::InvalidSpec, std::string(to_string(spec.kind)) + ": " + why);
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

AttackKind attack_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kNames) {
    if (name == s) return k;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown attack kind " + std::string(s));
}

void validate(const AttackSpec& spec) {
  if (!(spec.start < spec.stop)) invalid(spec, "start must precede stop");
  if (packet_based(spec.kind)) {
    if (!(spec.rate > 0.0) || !std::isfinite(spec.rate)) invalid(spec, "rate must be positive");
    if (spec.sources.empty()) invalid(spec, "needs a source");
    if (spec.target == kNoNode) invalid(spec, "needs a target");
  }
  switch (spec.kind) {
    case AttackKind::DosFlood:
      if (spec.sources.size() != 1) invalid(spec, "exactly one source");
      break;
    case AttackKind::DdosFlood:
      if (spec.sources.size() < 2) invalid(spec, "at least two sources");
      break;
    case AttackKind::PacketForge:
      if ((spec.flow_id & kAttackFlowBit) != 0) invalid(spec, "must impersonate a legitimate flow");
      break;
    case AttackKind::Eavesdrop:
      if (!spec.edge) invalid(spec, "needs an edge");
      break;
    case AttackKind::SensorTamper:
    case AttackKind::ActuatorTamper:
      if (spec.target == kNoNode) invalid(spec, "needs a target plant");
      break;
    case AttackKind::UserPrivEsc:
      if (spec.action.empty()) invalid(spec, "needs an action");
      break;
  }
}

std::uint64_t packets_per_source(const AttackSpec& spec) {
  if (!packet_based(spec.kind)) return 0;
  const double n = spec.rate * static_cast<double>(spec.stop.ticks - spec.start.ticks);
  return static_cast<std::uint64_t>(std::floor(n + 1e-9));
}

std::vector<Event> attack_events(const AttackSpec& spec, PacketFactory& factory, Rng& rng) {
  validate(spec);
  std::vector<Event> out;
  out.push_back(Event{spec.start, 0, EventKind::AttackStart, kNoNode, spec.target, spec.id});
  for (std::size_t s = 0; s < (packet_based(spec.kind) ? spec.sources.size() : 0); ++s) {
    std::uint64_t emitted = 0;
    for (std::uint64_t t = spec.start.ticks; t < spec.stop.ticks; ++t) {
      // Cumulative count keeps the total exact for fractional rates.
      const auto due = static_cast<std::uint64_t>(
          std::floor(spec.rate * static_cast<double>(t - spec.start.ticks + 1) + 1e-9));
      for (; emitted < due; ++emitted) {
        PacketFields f;
        f.src = spec.sources[s];
        f.dst = spec.target;
        f.sender_clock = static_cast<double>(t);
        if (spec.kind == AttackKind::PacketForge) {
          f.flow_id = spec.flow_id;
          f.payload.resize(16);
          for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng.next_u64());
        } else if (spec.kind == AttackKind::UserPrivEsc) {
          f.kind = PacketKind::Service;
          f.priority = 3;
          f.flow_id = kAttackFlowBit | (spec.id << 16) | s;
          f.payload.assign(spec.action.begin(), spec.action.end());
        } else {
          f.flow_id = kAttackFlowBit | (spec.id << 16) | s;
          f.payload.resize(32);
        }
        Packet p = factory.make_packet(std::move(f));
        if (spec.kind == AttackKind::PacketForge && rng.bernoulli(0.5)) p.auth_tag = rng.next_u64();
        out.push_back(Event{SimTime{t}, 0, EventKind::PacketSend, p.src, p.dst, std::move(p)});
      }
    }
  }
  out.push_back(Event{spec.stop, 0, EventKind::AttackStop, kNoNode, spec.target, spec.id});
  return out;
}

std::size_t inject_attack(Engine& engine, const AttackSpec& spec, PacketFactory& factory, Rng& rng) {
  auto events = attack_events(spec, factory, rng);
  for (Event& e : events) engine.schedule(std::move(e));
  return events.size();
}

}  // namespace sdcps
