#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdcps/core/engine.hpp"
#include "sdcps/core/packet.hpp"
#include "sdcps/core/rng.hpp"
#include "sdcps/core/types.hpp"

namespace sdcps {

enum class AttackKind { DosFlood, DdosFlood, PacketForge, Eavesdrop, UserPrivEsc, SensorTamper, ActuatorTamper };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view s);

/// Flood traffic uses flow ids with this bit set; such flows never hold keys.
inline constexpr std::uint64_t kAttackFlowBit = 1ULL << 62;

struct AttackSpec {
  std::uint64_t id = 0;
  AttackKind kind = AttackKind::DosFlood;
  SimTime start;
  SimTime stop;
  NodeId target = kNoNode;                      // flooded host, plant owner, controller
  std::optional<std::pair<NodeId, NodeId>> edge;  // eavesdrop tap
  double rate = 0.0;                            // packets/tick, per source
  std::vector<NodeId> sources;
  std::uint64_t flow_id = 0;                    // flow impersonated by forgeries
  double bias = 0.0;                            // sensor tamper
  double value = 0.0;                           // actuator override
  std::string action = "actuate";               // requested by privilege escalation
};

/// Throws InvalidSpec when the spec violates its kind's requirements.
void validate(const AttackSpec& spec);

/// floor(rate * (stop - start)), the packets each flooding source emits.
std::uint64_t packets_per_source(const AttackSpec& spec);

/// Events realizing `spec`: one PacketSend per injected packet (floods,
/// forgeries, privilege-escalation requests) plus AttackStart/AttackStop
/// carrying the attack id. Deterministic for a given rng state.
std::vector<Event> attack_events(const AttackSpec& spec, PacketFactory& factory, Rng& rng);

/// Validates and schedules `attack_events`; returns how many were scheduled.
std::size_t inject_attack(Engine& engine, const AttackSpec& spec, PacketFactory& factory, Rng& rng);

}  // namespace sdcps
