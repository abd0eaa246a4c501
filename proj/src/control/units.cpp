#include "sdcps/control/units.hpp"

#include <array>

#include "sdcps/core/error.hpp"

namespace sdcps {

namespace {

constexpr std::array<std::pair<DeviceKind, std::string_view>, 5> kKinds{{
    {DeviceKind::Sensor, "SENSOR"},
    {DeviceKind::AggSensor, "AGG_SENSOR"},
    {DeviceKind::Actuator, "ACTUATOR"},
    {DeviceKind::AccessPoint, "ACCESS_POINT"},
    {DeviceKind::Host, "HOST"},
}};

constexpr std::array<std::pair<DeviceStatus, std::string_view>, 6> kStatuses{{
    {DeviceStatus::Busy, "BUSY"},
    {DeviceStatus::Sending, "SENDING"},
    {DeviceStatus::Receiving, "RECEIVING"},
    {DeviceStatus::Asleep, "ASLEEP"},
    {DeviceStatus::LowBattery, "LOW_BATTERY"},
    {DeviceStatus::Ok, "OK"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, n] : table) {
    if (k == e) return n;
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [k, n] : table) {
    if (n == s) return k;
  }
  throw Error(ErrorCode::BadValue, "unknown name " + std::string(s));
}

}  // namespace

std::string_view to_string(DeviceKind k) { return name_of(kKinds, k); }
std::string_view to_string(DeviceStatus s) { return name_of(kStatuses, s); }
DeviceKind device_kind_from_string(std::string_view s) { return parse_name(kKinds, s); }
DeviceStatus device_status_from_string(std::string_view s) { return parse_name(kStatuses, s); }

void DeviceRegistry::register_device(DeviceRecord record) {
  if (devices_.contains(record.id)) {
    throw Error(ErrorCode::DuplicateDevice, "device " + std::to_string(record.id.value));
  }
  const DeviceEvent ev{DeviceEventKind::Joined, record.id, record.owner};
  devices_.emplace(record.id, std::move(record));
  if (listener_) listener_(ev);
}

void DeviceRegistry::extract_device(NodeId id) {
  auto it = devices_.find(id);
  if (it == devices_.end()) throw Error(ErrorCode::UnknownDevice, "device " + std::to_string(id.value));
  const DeviceEvent ev{DeviceEventKind::Extracted, id, it->second.owner};
  devices_.erase(it);
  if (listener_) listener_(ev);
}

const DeviceRecord& DeviceRegistry::lookup(NodeId id) const {
  auto it = devices_.find(id);
  if (it == devices_.end()) throw Error(ErrorCode::UnknownDevice, "device " + std::to_string(id.value));
  return it->second;
}

bool DeviceRegistry::track_device(const DeviceReport& report) {
  auto it = devices_.find(report.id);
  if (it == devices_.end()) throw Error(ErrorCode::UnknownDevice, "device " + std::to_string(report.id.value));
  DeviceRecord& r = it->second;
  if (report.at < r.last_seen) return false;
  r.last_seen = report.at;
  if (report.status) r.status = *report.status;
  if (report.location && !(*report.location == r.location)) {
    r.location = *report.location;
    if (listener_) listener_({DeviceEventKind::Moved, r.id, r.owner});
  }
  return true;
}

StorageReceipt StorageController::put(const std::string& key, std::span<const std::uint8_t> value) {
  const std::uint64_t digest = payload_digest(value);
  StorageReceipt receipt{key, digest, blobs_.contains(digest)};
  if (!receipt.deduplicated) blobs_.emplace(digest, std::vector<std::uint8_t>(value.begin(), value.end()));
  auto old = keys_.find(key);
  if (old != keys_.end() && old->second != digest) {
    const std::uint64_t prev = old->second;
    old->second = digest;
    // Drop the previous blob once nothing refers to it.
    bool used = false;
    for (const auto& [k, d] : keys_) used = used || d == prev;
    if (!used) blobs_.erase(prev);
  } else {
    keys_[key] = digest;
  }
  return receipt;
}

void StorageController::touch(const std::string& key) {
  if (capacity_ == 0) return;
  if (auto it = cached_.find(key); it != cached_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.push_front(key);
  cached_[key] = lru_.begin();
  if (lru_.size() > capacity_) {
    cached_.erase(lru_.back());
    lru_.pop_back();
  }
}

StorageRead StorageController::get(const std::string& key) {
  auto it = keys_.find(key);
  if (it == keys_.end()) throw Error(ErrorCode::NotFound, "key " + key);
  StorageRead out{blobs_.at(it->second), cached_.contains(key)};
  if (out.hit) {
    ++hits_;
  } else {
    ++misses_;
  }
  touch(key);
  return out;
}

void StorageController::replace(std::map<std::string, std::uint64_t> keys,
                                std::map<std::uint64_t, std::vector<std::uint8_t>> blobs) {
  keys_ = std::move(keys);
  blobs_ = std::move(blobs);
  lru_.clear();
  cached_.clear();
}

void ComputeController::assign(const Task& t) {
  cpu_used += t.cpu;
  mem_used += t.mem;
  ++tasks;
}

void ComputeController::release(const Task& t) {
  cpu_used = std::max(0.0, cpu_used - t.cpu);
  mem_used = std::max(0.0, mem_used - t.mem);
  if (tasks > 0) --tasks;
}

NodeId assign_task(std::span<ComputeController> controllers, const Task& task) {
  ComputeController* best = nullptr;
  for (ComputeController& c : controllers) {
    if (!c.fits(task)) continue;
    if (best == nullptr || c.tasks < best->tasks || (c.tasks == best->tasks && c.id < best->id)) best = &c;
  }
  if (best == nullptr) throw Error(ErrorCode::Saturated, "no controller has room for the task");
  best->assign(task);
  return best->id;
}

QosRules QosRules::defaults() {
  QosRules q;
  q.rules = {
      {std::nullopt, true, 0},
      {PacketKind::Security, false, 1},
      {PacketKind::Control, false, 2},
      {PacketKind::Actuate, false, 2},
      {PacketKind::Sense, false, 3},
  };
  return q;
}

int organize_priority(const Packet& p, const QosRules& rules) {
  for (const QosRule& r : rules.rules) {
    if (r.kind && *r.kind != p.kind) continue;
    if (r.emergency_only && !rules.emergency_flows.contains(p.flow_id)) continue;
    return r.priority;
  }
  return rules.default_priority;
}

std::optional<std::vector<Packet>> AggregateUnit::add(Packet p) {
  auto& batch = batches_[p.flow_id];
  batch.push_back(std::move(p));
  if (batch.size() < threshold_) return std::nullopt;
  auto node = batches_.extract(batch.front().flow_id);
  return std::move(node.mapped());
}

std::vector<std::vector<Packet>> AggregateUnit::flush_due(SimTime now) {
  std::vector<std::vector<Packet>> out;
  for (auto it = batches_.begin(); it != batches_.end();) {
    bool due = false;
    for (const Packet& p : it->second) due = due || (p.deadline && *p.deadline <= now);
    if (due) {
      out.push_back(std::move(it->second));
      it = batches_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

std::size_t AggregateUnit::pending() const {
  std::size_t n = 0;
  for (const auto& [flow, batch] : batches_) n += batch.size();
  return n;
}

}  // namespace sdcps
