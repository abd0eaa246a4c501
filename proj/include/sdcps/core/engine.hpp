#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "sdcps/core/packet.hpp"
#include "sdcps/core/types.hpp"

namespace sdcps {

enum class EventKind {
  ControlTick,
  PacketSend,
  PacketArrive,
  LinkChange,
  DeviceJoin,
  DeviceLeave,
  AttackStart,
  AttackStop,
  Heartbeat,
  Timeout,
};

std::string_view to_string(EventKind kind);

/// Kind-specific record: a packet in flight, or an opaque reference (request
/// id, attack index, ...) interpreted by whoever scheduled the event.
using EventPayload = std::variant<std::monostate, Packet, std::uint64_t>;

struct Event {
  SimTime at;
  std::uint64_t seq = 0;  // assigned by the engine
  EventKind kind = EventKind::ControlTick;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  EventPayload payload;
};

/// Serializes delivered events as `tick,seq,kind,src,dst,detail` lines and
/// folds them into a running FNV-1a digest. Lines go to `out` when set.
class EventTrace {
 public:
  explicit EventTrace(std::ostream* out = nullptr) : out_(out) {}

  void record(const Event& e);

  std::uint64_t digest() const { return digest_; }
  std::uint64_t lines() const { return lines_; }

  static std::string format(const Event& e);

 private:
  std::ostream* out_;
  std::uint64_t digest_ = 0xcbf29ce484222325ULL;
  std::uint64_t lines_ = 0;
  std::string buf_;
};

/// Single-threaded discrete-event engine. Events are delivered in
/// lexicographic (at, seq) order; seq is assigned at schedule time, so ties
/// on time resolve in insertion order.
class Engine {
 public:
  Engine() = default;

  SimTime now() const { return now_; }
  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }

  /// Enqueues `event` and returns the seq it was assigned.
  std::uint64_t schedule(Event event);

  std::uint64_t schedule(SimTime at, EventKind kind, NodeId src = kNoNode, NodeId dst = kNoNode,
                         EventPayload payload = {});

  /// Time of the next event without removing it.
  std::optional<SimTime> peek_time() const;

  /// Removes the minimal (at, seq) event and moves the clock to its time.
  std::pair<SimTime, Event> advance();

  void set_trace(EventTrace* trace) { trace_ = trace; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  SimTime now_;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  EventTrace* trace_ = nullptr;
};

}  // namespace sdcps
