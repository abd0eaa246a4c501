#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdcps/core/packet.hpp"
#include "sdcps/core/types.hpp"

namespace sdcps {

// ---- SDIoT: device registry and tracking ----------------------------------

enum class DeviceKind { Sensor, AggSensor, Actuator, AccessPoint, Host };
enum class DeviceStatus { Busy, Sending, Receiving, Asleep, LowBattery, Ok };

std::string_view to_string(DeviceKind k);
std::string_view to_string(DeviceStatus s);
DeviceKind device_kind_from_string(std::string_view s);
DeviceStatus device_status_from_string(std::string_view s);

struct DeviceRecord {
  NodeId id;
  DeviceKind kind = DeviceKind::Sensor;
  DeviceStatus status = DeviceStatus::Ok;
  Vec2 location;
  SimTime last_seen;
  NodeId owner = kNoNode;

  friend bool operator==(const DeviceRecord&, const DeviceRecord&) = default;
};

struct DeviceReport {
  NodeId id;
  SimTime at;
  std::optional<DeviceStatus> status;
  std::optional<Vec2> location;
};

enum class DeviceEventKind { Joined, Extracted, Moved };

struct DeviceEvent {
  DeviceEventKind kind;
  NodeId device;
  NodeId owner;
};

class DeviceRegistry {
 public:
  using Listener = std::function<void(const DeviceEvent&)>;

  void register_device(DeviceRecord record);
  void extract_device(NodeId id);
  const DeviceRecord& lookup(NodeId id) const;
  bool contains(NodeId id) const { return devices_.contains(id); }

  /// Applies a report unless it is older than the record; returns whether it
  /// was applied.
  bool track_device(const DeviceReport& report);

  std::size_t size() const { return devices_.size(); }
  const std::map<NodeId, DeviceRecord>& records() const { return devices_; }
  void replace(std::map<NodeId, DeviceRecord> records) { devices_ = std::move(records); }

  /// Notified on join, extract and location change (middleware registration).
  void set_listener(Listener l) { listener_ = std::move(l); }

 private:
  std::map<NodeId, DeviceRecord> devices_;
  Listener listener_;
};

// ---- SDS: deduplicating store with an LRU read cache ----------------------

struct StorageReceipt {
  std::string key;
  std::uint64_t digest = 0;
  bool deduplicated = false;  // the content was already stored
};

struct StorageRead {
  std::vector<std::uint8_t> value;
  bool hit = false;
};

class StorageController {
 public:
  explicit StorageController(std::size_t cache_capacity = 16) : capacity_(cache_capacity) {}

  StorageReceipt put(const std::string& key, std::span<const std::uint8_t> value);
  StorageRead get(const std::string& key);  // throws NotFound

  std::size_t key_count() const { return keys_.size(); }
  std::size_t blob_count() const { return blobs_.size(); }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }
  std::size_t cache_capacity() const { return capacity_; }

  const std::map<std::string, std::uint64_t>& keys() const { return keys_; }
  const std::map<std::uint64_t, std::vector<std::uint8_t>>& blobs() const { return blobs_; }

  /// Replaces keys and blobs; the cache starts cold.
  void replace(std::map<std::string, std::uint64_t> keys, std::map<std::uint64_t, std::vector<std::uint8_t>> blobs);

 private:
  void touch(const std::string& key);

  std::size_t capacity_;
  std::map<std::string, std::uint64_t> keys_;
  std::map<std::uint64_t, std::vector<std::uint8_t>> blobs_;
  std::list<std::string> lru_;  // front = most recent
  std::unordered_map<std::string, std::list<std::string>::iterator> cached_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
};

// ---- SDCompute: resource counters and load balancing ---------------------

struct Task {
  double cpu = 1.0;
  double mem = 1.0;
};

struct ComputeController {
  NodeId id;
  double cpu_capacity = 8.0;
  double mem_capacity = 16.0;
  double cpu_used = 0.0;
  double mem_used = 0.0;
  std::size_t tasks = 0;

  bool fits(const Task& t) const { return cpu_used + t.cpu <= cpu_capacity && mem_used + t.mem <= mem_capacity; }
  void assign(const Task& t);
  void release(const Task& t);

  friend bool operator==(const ComputeController&, const ComputeController&) = default;
};

/// Least task count among controllers with room, ties to the lowest id.
/// Throws Saturated.
NodeId assign_task(std::span<ComputeController> controllers, const Task& task);

// ---- Organizer: QoS priority rules ----------------------------------------

struct QosRule {
  std::optional<PacketKind> kind;
  bool emergency_only = false;  // matches flows listed as emergency
  int priority = 4;

  friend bool operator==(const QosRule&, const QosRule&) = default;
};

struct QosRules {
  std::vector<QosRule> rules;
  std::set<std::uint64_t> emergency_flows;
  int default_priority = 4;

  /// Emergency flows 0, SECURITY 1, CONTROL and ACTUATE 2, SENSE 3.
  static QosRules defaults();
  friend bool operator==(const QosRules&, const QosRules&) = default;
};

int organize_priority(const Packet& p, const QosRules& rules);

// ---- Aggregate unit: per-flow batching ------------------------------------

class AggregateUnit {
 public:
  explicit AggregateUnit(std::size_t flush_threshold = 4) : threshold_(flush_threshold) {}

  /// Adds a packet; returns the flow's batch when it reaches the threshold.
  std::optional<std::vector<Packet>> add(Packet p);

  /// Batches whose earliest deadline is at or before `now`.
  std::vector<std::vector<Packet>> flush_due(SimTime now);

  std::size_t pending() const;

 private:
  std::size_t threshold_;
  std::map<std::uint64_t, std::vector<Packet>> batches_;
};

}  // namespace sdcps
