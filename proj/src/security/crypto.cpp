#include "sdcps/security/crypto.hpp"

#include "sdcps/core/error.hpp"
#include "sdcps/core/rng.hpp"

namespace sdcps {

std::uint64_t keyed_digest(std::span<const std::uint64_t> words, std::uint64_t key) {
  std::uint64_t h = key ^ 0x6A09E667F3BCC908ULL;
  for (std::uint64_t w : words) h = mix64(h ^ w);
  return mix64(h ^ key);
}

std::uint64_t packet_tag(const Packet& p, std::uint64_t key) {
  const std::uint64_t words[] = {
      p.id,
      p.src.value,
      p.dst.value,
      static_cast<std::uint64_t>(p.kind),
      static_cast<std::uint64_t>(p.priority),
      p.deadline ? p.deadline->ticks : ~0ULL,
      p.flow_id,
      p.seq_in_flow,
      p.payload_size,
      p.payload_digest,
  };
  return keyed_digest(words, key);
}

void keystream_transform(std::vector<std::uint8_t>& bytes, std::uint64_t key, std::uint64_t nonce) {
  Rng stream(mix64(key ^ mix64(nonce)));
  std::uint64_t block = 0;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i % 8 == 0) block = stream.next_u64();
    bytes[i] ^= static_cast<std::uint8_t>(block >> (8 * (i % 8)));
  }
}

std::uint64_t KeyRing::key(std::uint64_t flow) const {
  auto it = keys_.find(flow);
  if (it == keys_.end()) throw Error(ErrorCode::NoKey, "flow " + std::to_string(flow));
  return it->second;
}

Packet seal(Packet packet, const KeyRing& keys) {
  const std::uint64_t k = keys.key(packet.flow_id);
  if (keys.encryption()) keystream_transform(packet.payload, k, packet.id);
  packet.payload_size = static_cast<std::uint32_t>(packet.payload.size());
  packet.payload_digest = payload_digest(packet.payload);
  packet.auth_tag = packet_tag(packet, k);
  return packet;
}

bool verify_tag(const Packet& packet, const KeyRing& keys) {
  if (!packet.auth_tag || !keys.has_key(packet.flow_id)) return false;
  if (packet.payload_digest != payload_digest(packet.payload)) return false;
  return *packet.auth_tag == packet_tag(packet, keys.key(packet.flow_id));
}

Packet unseal(Packet packet, const KeyRing& keys) {
  const std::uint64_t k = keys.key(packet.flow_id);
  if (keys.encryption()) keystream_transform(packet.payload, k, packet.id);
  return packet;
}

}  // namespace sdcps
