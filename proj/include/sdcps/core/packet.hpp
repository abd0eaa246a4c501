#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sdcps/core/types.hpp"

namespace sdcps {

enum class PacketKind { Data, Control, Sense, Actuate, Security, Service };

std::string_view to_string(PacketKind kind);

inline constexpr int kPriorityLevels = 8;
inline constexpr int kLowestPriority = kPriorityLevels - 1;

/// The unit of communication and actuation. Carries the scheduling fields
/// (priority, deadline), the positioning and timing stamps used by the
/// middleware services, flow identity, and the authentication tag checked by
/// the security pipeline.
struct Packet {
  std::uint64_t id = 0;
  NodeId src;
  NodeId dst;
  PacketKind kind = PacketKind::Data;
  int priority = 4;  // 0 is most urgent
  std::optional<SimTime> deadline;
  double created_at_sender_clock = 0.0;
  std::optional<Vec2> position;
  std::optional<Vec2> speed;
  std::uint32_t payload_size = 0;
  std::uint64_t payload_digest = 0;
  std::optional<std::uint64_t> auth_tag;
  int ttl = 16;
  std::uint64_t flow_id = 0;
  std::uint64_t seq_in_flow = 0;

  std::vector<std::uint8_t> payload;
  /// Abstract stand-in for trojan or application-layer content.
  bool malicious_payload = false;
};

/// FNV-1a over the payload bytes (offset basis 0xcbf29ce484222325,
/// prime 0x100000001b3).
std::uint64_t payload_digest(std::span<const std::uint8_t> bytes);

struct PacketFields {
  NodeId src;
  NodeId dst;
  PacketKind kind = PacketKind::Data;
  int priority = 4;
  std::optional<SimTime> deadline;
  double sender_clock = 0.0;
  std::optional<Vec2> position;
  std::optional<Vec2> speed;
  std::vector<std::uint8_t> payload;
  int ttl = 16;
  std::uint64_t flow_id = 0;
};

/// Issues packet ids and per-flow sequence numbers. One factory per sender
/// population keeps seq_in_flow strictly increasing for every flow.
class PacketFactory {
 public:
  Packet make_packet(PacketFields fields);

  std::uint64_t issued() const { return next_id_; }

 private:
  std::uint64_t next_id_ = 0;
  std::map<std::uint64_t, std::uint64_t> next_seq_;
};

}  // namespace sdcps
