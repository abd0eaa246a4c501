#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sdcps/core/packet.hpp"

namespace sdcps {

/// Keyed 64-bit mixing digest. Not cryptographic: it chains SplitMix64's
/// finalizer over the words, seeded with key ^ 0x6A09E667F3BCC908 and closed
/// with one more round over the key.
std::uint64_t keyed_digest(std::span<const std::uint64_t> words, std::uint64_t key);

/// Tag input: id, src, dst, kind, priority, deadline, flow, seq, size and
/// payload digest.
std::uint64_t packet_tag(const Packet& p, std::uint64_t key);

/// XORs bytes with a keyed SplitMix64 stream; applying it twice restores
/// the input.
void keystream_transform(std::vector<std::uint8_t>& bytes, std::uint64_t key, std::uint64_t nonce);

/// Per-flow shared keys plus the global payload-encryption switch.
class KeyRing {
 public:
  void set_key(std::uint64_t flow, std::uint64_t key) { keys_[flow] = key; }
  bool has_key(std::uint64_t flow) const { return keys_.contains(flow); }
  std::uint64_t key(std::uint64_t flow) const;

  bool encryption() const { return encrypt_; }
  void set_encryption(bool on) { encrypt_ = on; }

 private:
  std::map<std::uint64_t, std::uint64_t> keys_;
  bool encrypt_ = false;
};

/// Encrypts the payload when encryption is on, refreshes the payload digest
/// and sets the auth tag. Throws NoKey.
Packet seal(Packet packet, const KeyRing& keys);

/// True when the packet carries a tag, its payload digest matches its bytes
/// and the tag matches the flow key. A missing key verifies false.
bool verify_tag(const Packet& packet, const KeyRing& keys);

/// Reverses the encryption applied by `seal`. Throws NoKey.
Packet unseal(Packet packet, const KeyRing& keys);

}  // namespace sdcps
