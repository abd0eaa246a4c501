#include "sdcps/core/engine.hpp"

#include "sdcps/core/error.hpp"

namespace sdcps {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::ControlTick: return "ControlTick";
    case EventKind::PacketSend: return "PacketSend";
    case EventKind::PacketArrive: return "PacketArrive";
    case EventKind::LinkChange: return "LinkChange";
    case EventKind::DeviceJoin: return "DeviceJoin";
    case EventKind::DeviceLeave: return "DeviceLeave";
    case EventKind::AttackStart: return "AttackStart";
    case EventKind::AttackStop: return "AttackStop";
    case EventKind::Heartbeat: return "Heartbeat";
    case EventKind::Timeout: return "Timeout";
  }
  return "?";
}

namespace {

void append_node(std::string& s, NodeId id) {
  if (id == kNoNode) {
    s += '-';
  } else {
    s += std::to_string(id.value);
  }
}

}  // namespace

std::string EventTrace::format(const Event& e) {
  std::string s;
  s.reserve(48);
  s += std::to_string(e.at.ticks);
  s += ',';
  s += std::to_string(e.seq);
  s += ',';
  s += to_string(e.kind);
  s += ',';
  append_node(s, e.src);
  s += ',';
  append_node(s, e.dst);
  s += ',';
  if (const auto* p = std::get_if<Packet>(&e.payload)) {
    s += "pkt=";
    s += std::to_string(p->id);
  } else if (const auto* r = std::get_if<std::uint64_t>(&e.payload)) {
    s += "ref=";
    s += std::to_string(*r);
  }
  return s;
}

void EventTrace::record(const Event& e) {
  buf_ = format(e);
  buf_ += '\n';
  for (char c : buf_) {
    digest_ ^= static_cast<std::uint8_t>(c);
    digest_ *= 0x100000001b3ULL;
  }
  ++lines_;
  if (out_ != nullptr) *out_ << buf_;
}

std::uint64_t Engine::schedule(Event event) {
  if (event.at < now_) {
    throw Error(ErrorCode::PastEvent,
                "event at " + std::to_string(event.at.ticks) + " before now " + std::to_string(now_.ticks));
  }
  event.seq = next_seq_++;
  const std::uint64_t seq = event.seq;
  queue_.push(std::move(event));
  return seq;
}

std::uint64_t Engine::schedule(SimTime at, EventKind kind, NodeId src, NodeId dst, EventPayload payload) {
  Event e;
  e.at = at;
  e.kind = kind;
  e.src = src;
  e.dst = dst;
  e.payload = std::move(payload);
  return schedule(std::move(e));
}

std::optional<SimTime> Engine::peek_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().at;
}

std::pair<SimTime, Event> Engine::advance() {
  if (queue_.empty()) throw Error(ErrorCode::Drained, "no pending events");
  // priority_queue::top is const; the element is discarded right after.
  Event e = std::move(const_cast<Event&>(queue_.top()));
  queue_.pop();
  now_ = e.at;
  if (trace_ != nullptr) trace_->record(e);
  return {now_, std::move(e)};
}

}  // namespace sdcps
