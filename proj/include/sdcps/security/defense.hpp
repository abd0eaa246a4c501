#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdcps/core/packet.hpp"
#include "sdcps/core/types.hpp"
#include "sdcps/topology/graph.hpp"
#include "sdcps/topology/hierarchy.hpp"

namespace sdcps {

struct DetectorParams {
  std::uint64_t theta = 20;     // packets per (src,dst) per window
  std::uint64_t window = 50;    // ticks
  std::uint64_t denials = 3;    // per subject per window
  std::uint64_t cooldown = 200; // ticks
};

enum class FindingKind {
  DosFlood,
  DdosFlood,
  PacketForge,
  UserPrivEsc,
  MaliciousPayload,
  PhantomNode,
  SensorTamper,
  ActuatorTamper,
};
enum class FindingState { Detected, Prevented, Handled };

std::string_view to_string(FindingKind kind);
FindingKind finding_kind_from_string(std::string_view s);
std::string_view to_string(FindingState state);

struct Finding {
  std::uint64_t id = 0;
  FindingKind kind = FindingKind::DosFlood;
  NodeId target = kNoNode;
  SimTime at;
  FindingState state = FindingState::Detected;
  std::string evidence;  // `key=value` pairs joined by ';'
  std::vector<NodeId> sources;
  std::uint64_t flow = 0;
  std::string subject;
  std::uint64_t count = 0;
};

/// Per-window traffic statistics gathered at an ingress point.
struct TrafficWindow {
  SimTime start;
  SimTime end;
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> counts;  // (src,dst) -> packets
  std::map<std::uint64_t, std::pair<NodeId, std::uint64_t>> tag_failures;  // flow -> (dst, count)
  std::map<std::string, std::uint64_t> denials;  // subject -> count
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> flagged;  // malicious payloads
};

struct Signature {
  FindingKind kind = FindingKind::DosFlood;
  std::map<std::string, std::string> features;

  /// `KIND:key=value,key=value` with keys in sorted order.
  std::string str() const;
  static Signature parse(std::string_view line);
  auto operator<=>(const Signature&) const = default;
};

Signature signature_of(const Finding& f);

class KnowledgeBase {
 public:
  /// Appends to the history; returns true when the signature was new.
  bool learn(const Finding& f);
  bool add_signature(const Signature& s) { return signatures_.insert(s).second; }
  void replace_signatures(std::set<Signature> s) { signatures_ = std::move(s); }
  bool knows(const Signature& s) const { return signatures_.contains(s); }
  bool flags_malicious_payloads() const;

  std::size_t size() const { return signatures_.size(); }
  const std::set<Signature>& signatures() const { return signatures_; }
  const std::vector<Finding>& history() const { return history_; }

  /// Hot-loads a signature file (blank lines and '#' comments skipped);
  /// returns the number of new signatures.
  std::size_t load(std::istream& in);
  void save(std::ostream& out) const;

 private:
  std::set<Signature> signatures_;
  std::vector<Finding> history_;
};

/// Flood, forgery, privilege-escalation and known-payload findings for one
/// closed window. Findings come back with id 0 and state DETECTED.
std::vector<Finding> scan_window(const TrafficWindow& w, const DetectorParams& params, const KnowledgeBase& kb);

enum class RuleKind { DropFlow, DropUnverified, LockSubject };

struct DropRule {
  std::uint64_t finding = 0;
  RuleKind kind = RuleKind::DropFlow;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  std::uint64_t flow = 0;
  std::string subject;
  SimTime installed;
  std::optional<SimTime> expires;

  bool active(SimTime now) const { return !expires || now < *expires; }
};

struct InventoryItem {
  NodeId id;
  NodeRole role = NodeRole::Switch;
  NodeId owner = kNoNode;
  std::optional<Vec2> location;
};

using Inventory = std::map<NodeId, InventoryItem>;

/// Every non-host vertex with its role and owning controller (tree parent;
/// none for vertices the hierarchy does not know).
Inventory audit_map(const NetGraph& graph, const Hierarchy& hierarchy,
                    const std::map<NodeId, Vec2>& locations = {});

struct InventoryDiff {
  std::vector<NodeId> added;
  std::vector<NodeId> removed;
  std::size_t size() const { return added.size() + removed.size(); }
};

InventoryDiff diff_inventory(const Inventory& before, const Inventory& after);

struct SecurityStatus {
  std::size_t detected = 0;
  std::size_t prevented = 0;
  std::size_t handled = 0;
  std::size_t active_findings = 0;
  std::size_t active_rules = 0;
  std::optional<SimTime> last_audit;
  std::size_t kb_size = 0;
};

struct HandleResult {
  bool new_signature = false;
  bool reestimate = false;  // tampered plant needs a fresh estimate
  bool restore = false;     // controller state should be restored from backup
};

/// One controller's security pipeline: windowed scanning of ingress traffic,
/// findings, drop rules, the knowledge base and the audit baseline.
class SecurityController {
 public:
  explicit SecurityController(DetectorParams params = {});

  const DetectorParams& params() const { return params_; }

  /// Closes every window that ended at or before `now`, scanning each;
  /// traffic matching an unhandled finding does not raise another.
  /// Returns the ids of new findings.
  std::vector<std::uint64_t> advance(SimTime now);

  /// Counts an ingress packet into the current window.
  void observe(const Packet& p, bool tag_failed, SimTime now);
  void record_denial(const std::string& subject, SimTime now);

  /// False when an active rule drops the packet.
  bool admit(const Packet& p, bool tag_failed, SimTime now) const;
  bool subject_locked(const std::string& subject, SimTime now) const;

  /// Registers an externally detected finding; returns its id.
  std::uint64_t raise(Finding f);

  /// Installs the drop rule for a DETECTED finding. Throws AlreadyPrevented
  /// or InvalidTransition.
  DropRule prevent(std::uint64_t finding, SimTime now);

  /// Completes mitigation: the finding's rules expire after the cooldown and
  /// its signature goes to the knowledge base. Throws InvalidTransition when
  /// already handled.
  HandleResult handle(std::uint64_t finding, SimTime now);

  /// Automatic pipeline run after `advance`: prevents new findings and
  /// handles prevented ones whose offending traffic stayed quiet for a
  /// whole window.
  void respond(SimTime now);

  /// Replaces the audit baseline; returns ids of PHANTOM_NODE findings for
  /// vertices that appeared since the previous audit.
  std::vector<std::uint64_t> audit(const NetGraph& graph, const Hierarchy& hierarchy, SimTime now);

  SecurityStatus status(SimTime now) const;

  const Finding& finding(std::uint64_t id) const;
  const std::vector<Finding>& findings() const { return findings_; }
  const std::vector<DropRule>& rules() const { return rules_; }
  void replace_rules(std::vector<DropRule> rules) { rules_ = std::move(rules); }
  KnowledgeBase& kb() { return kb_; }
  const KnowledgeBase& kb() const { return kb_; }
  const std::vector<std::string>& log_lines() const { return log_; }
  void set_log(std::ostream* out) { out_ = out; }

 private:
  Finding& mut(std::uint64_t id);
  void log(SimTime tick, const Finding& f);
  void close_window();
  void roll(SimTime now);
  bool quiet_last_window(const Finding& f) const;

  DetectorParams params_;
  TrafficWindow current_;
  TrafficWindow last_closed_;
  bool have_closed_ = false;
  std::vector<Finding> findings_;
  std::vector<DropRule> rules_;
  KnowledgeBase kb_;
  std::optional<Inventory> baseline_;
  std::optional<SimTime> last_audit_;
  std::vector<std::string> log_;
  std::ostream* out_ = nullptr;
  std::vector<std::uint64_t> pending_;  // detected in the last advance
};

}  // namespace sdcps
