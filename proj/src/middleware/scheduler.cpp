#include "sdcps/middleware/scheduler.hpp"

#include <limits>

#include "sdcps/core/error.hpp"

namespace sdcps {

void PacketScheduler::log(SimTime tick, const Packet& p, const char* action) {
  if (trace_ == nullptr) return;
  *trace_ << tick.ticks << ',' << p.id << ',' << p.priority << ',';
  if (p.deadline) {
    *trace_ << p.deadline->ticks;
  } else {
    *trace_ << '-';
  }
  *trace_ << ',' << action << '\n';
}

EnqueueResult PacketScheduler::enqueue(Packet packet, SimTime now) {
  if (packet.priority < 0 || packet.priority > kLowestPriority) {
    throw Error(ErrorCode::InvalidPriority, "priority " + std::to_string(packet.priority));
  }
  if (packet.deadline && *packet.deadline < now) {
    ++expired_;
    log(now, packet, "expire");
    return EnqueueResult::Expired;
  }
  const std::size_t bin = bin_of_ ? bin_of_(packet) : 0;
  const Key key{packet.deadline ? packet.deadline->ticks : std::numeric_limits<std::uint64_t>::max(), arrivals_++};
  log(now, packet, "enqueue");
  if (stamps_ != nullptr) stamps_->record(packet.id, "enqueue", now);
  const auto prio = static_cast<std::size_t>(packet.priority);
  bins_[bin][prio].emplace(key, std::move(packet));
  ++size_;
  return EnqueueResult::Queued;
}

std::optional<Packet> PacketScheduler::pop_from(Bin& bin) {
  for (Class& cls : bin) {
    if (cls.empty()) continue;
    auto node = cls.extract(cls.begin());
    --size_;
    return std::move(node.mapped());
  }
  return std::nullopt;
}

std::optional<Packet> PacketScheduler::dispatch(SimTime now) {
  if (size_ == 0) return std::nullopt;
  // Round-robin over non-empty bins, starting after the last one served.
  auto it = last_bin_ ? bins_.upper_bound(*last_bin_) : bins_.begin();
  for (std::size_t tried = 0; tried <= bins_.size(); ++tried) {
    if (it == bins_.end()) it = bins_.begin();
    if (auto p = pop_from(it->second)) {
      last_bin_ = it->first;
      log(now, *p, "dispatch");
      if (stamps_ != nullptr) stamps_->record(p->id, "dispatch", now);
      return p;
    }
    ++it;
  }
  return std::nullopt;
}

std::vector<Packet> PacketScheduler::drain() {
  std::vector<Packet> out;
  out.reserve(size_);
  for (auto& [id, bin] : bins_) {
    while (auto p = pop_from(bin)) out.push_back(std::move(*p));
  }
  bins_.clear();
  last_bin_.reset();
  return out;
}

std::size_t PacketScheduler::size_at(int priority) const {
  std::size_t n = 0;
  for (const auto& [id, bin] : bins_) n += bin[static_cast<std::size_t>(priority)].size();
  return n;
}

std::optional<int> PacketScheduler::best_priority() const {
  for (int p = 0; p < kPriorityLevels; ++p) {
    if (size_at(p) > 0) return p;
  }
  return std::nullopt;
}

}  // namespace sdcps
