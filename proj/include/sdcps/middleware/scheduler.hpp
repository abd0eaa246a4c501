#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <tuple>
#include <vector>

#include "sdcps/core/packet.hpp"
#include "sdcps/core/types.hpp"

namespace sdcps {

/// Append-only record of when things happened (arrivals, dispatches,
/// sensed values, control actions), keyed by an opaque id.
class TimestampService {
 public:
  struct Stamp {
    std::uint64_t id;
    const char* what;
    SimTime at;
  };

  void record(std::uint64_t id, const char* what, SimTime at) { stamps_.push_back({id, what, at}); }
  const std::vector<Stamp>& stamps() const { return stamps_; }

 private:
  std::vector<Stamp> stamps_;
};

enum class EnqueueResult { Queued, Expired };

/// Kernel-space packet scheduler: eight strict-priority classes, each served
/// earliest-deadline-first with arrival order breaking ties (no deadline
/// sorts last). With location bins enabled every bin holds its own eight
/// classes and non-empty bins are served round-robin.
class PacketScheduler {
 public:
  using BinFn = std::function<std::size_t(const Packet&)>;

  PacketScheduler() = default;
  explicit PacketScheduler(BinFn bin_of) : bin_of_(std::move(bin_of)) {}

  EnqueueResult enqueue(Packet packet, SimTime now);

  /// Next packet per the policy above, or nullopt when idle.
  std::optional<Packet> dispatch(SimTime now);

  /// Removes and returns everything queued, bin by bin, each bin in
  /// priority/deadline order. Not traced.
  std::vector<Packet> drain();

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t size_at(int priority) const;
  std::uint64_t expired() const { return expired_; }

  /// Most urgent priority currently queued (any bin), if any.
  std::optional<int> best_priority() const;

  /// Writes `tick,packet_id,priority,deadline,action` lines.
  void set_trace(std::ostream* out) { trace_ = out; }
  void set_timestamps(TimestampService* ts) { stamps_ = ts; }

 private:
  // (deadline or max, arrival seq)
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  using Class = std::map<Key, Packet>;
  using Bin = std::array<Class, kPriorityLevels>;

  void log(SimTime tick, const Packet& p, const char* action);
  std::optional<Packet> pop_from(Bin& bin);

  BinFn bin_of_;
  std::map<std::size_t, Bin> bins_;
  std::optional<std::size_t> last_bin_;
  std::uint64_t arrivals_ = 0;
  std::size_t size_ = 0;
  std::uint64_t expired_ = 0;
  std::ostream* trace_ = nullptr;
  TimestampService* stamps_ = nullptr;
};

}  // namespace sdcps
