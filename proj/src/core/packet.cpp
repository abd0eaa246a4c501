#include "sdcps/core/packet.hpp"

#include <string>

#include "sdcps/core/error.hpp"

namespace sdcps {

std::string_view to_string(PacketKind kind) {
  switch (kind) {
    case PacketKind::Data: return "DATA";
    case PacketKind::Control: return "CONTROL";
    case PacketKind::Sense: return "SENSE";
    case PacketKind::Actuate: return "ACTUATE";
    case PacketKind::Security: return "SECURITY";
    case PacketKind::Service: return "SERVICE";
  }
  return "?";
}

std::uint64_t payload_digest(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Packet PacketFactory::make_packet(PacketFields fields) {
  if (fields.priority < 0 || fields.priority > kLowestPriority) {
    throw Error(ErrorCode::InvalidPriority, "priority " + std::to_string(fields.priority) + " outside [0,7]");
  }
  if (fields.ttl < 1) {
    throw Error(ErrorCode::InvalidTtl, "ttl " + std::to_string(fields.ttl) + " must be >= 1");
  }
  Packet p;
  p.id = next_id_++;
  p.src = fields.src;
  p.dst = fields.dst;
  p.kind = fields.kind;
  p.priority = fields.priority;
  p.deadline = fields.deadline;
  p.created_at_sender_clock = fields.sender_clock;
  p.position = fields.position;
  p.speed = fields.speed;
  p.payload_size = static_cast<std::uint32_t>(fields.payload.size());
  p.payload_digest = payload_digest(fields.payload);
  p.ttl = fields.ttl;
  p.flow_id = fields.flow_id;
  p.seq_in_flow = next_seq_[fields.flow_id]++;
  p.payload = std::move(fields.payload);
  return p;
}

}  // namespace sdcps
