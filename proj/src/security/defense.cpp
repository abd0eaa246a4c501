#include "sdcps/security/defense.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "sdcps/core/error.hpp"

namespace sdcps {

namespace {

constexpr std::array<std::pair<FindingKind, std::string_view>, 8> kKindNames{{
    {FindingKind::DosFlood, "DOS_FLOOD"},
    {FindingKind::DdosFlood, "DDOS_FLOOD"},
    {FindingKind::PacketForge, "PACKET_FORGE"},
    {FindingKind::UserPrivEsc, "USER_PRIV_ESC"},
    {FindingKind::MaliciousPayload, "MALICIOUS_PAYLOAD"},
    {FindingKind::PhantomNode, "PHANTOM_NODE"},
    {FindingKind::SensorTamper, "SENSOR_TAMPER"},
    {FindingKind::ActuatorTamper, "ACTUATOR_TAMPER"},
}};

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string s;
  for (NodeId n : ids) {
    if (!s.empty()) s += '+';
    s += std::to_string(n.value);
  }
  return s;
}

bool window_empty(const TrafficWindow& w) {
  return w.counts.empty() && w.tag_failures.empty() && w.denials.empty() && w.flagged.empty();
}

}  // namespace

std::string_view to_string(FindingKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

FindingKind finding_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  throw Error(ErrorCode::BadValue, "finding kind " + std::string(s));
}

std::string_view to_string(FindingState state) {
  switch (state) {
    case FindingState::Detected: return "DETECTED";
    case FindingState::Prevented: return "PREVENTED";
    case FindingState::Handled: return "HANDLED";
  }
  return "?";
}

std::string Signature::str() const {
  std::string s(to_string(kind));
  s += ':';
  bool first = true;
  for (const auto& [k, v] : features) {
    if (!first) s += ',';
    first = false;
    s += k + '=' + v;
  }
  return s;
}

Signature Signature::parse(std::string_view line) {
  const auto colon = line.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::BadValue, "signature without kind: " + std::string(line));
  Signature sig;
  sig.kind = finding_kind_from_string(line.substr(0, colon));
  std::string_view rest = line.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(ErrorCode::BadValue, "signature feature " + std::string(item));
    }
    sig.features[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  return sig;
}

Signature signature_of(const Finding& f) {
  Signature s{f.kind, {}};
  switch (f.kind) {
    case FindingKind::DosFlood:
      s.features["dst"] = std::to_string(f.target.value);
      s.features["src"] = join_ids(f.sources);
      break;
    case FindingKind::DdosFlood:
      s.features["dst"] = std::to_string(f.target.value);
      s.features["sources"] = join_ids(f.sources);
      break;
    case FindingKind::PacketForge:
      s.features["flow"] = std::to_string(f.flow);
      break;
    case FindingKind::UserPrivEsc:
      s.features["subject"] = f.subject;
      break;
    case FindingKind::MaliciousPayload:
      s.features["flag"] = "1";
      break;
    case FindingKind::PhantomNode:
    case FindingKind::SensorTamper:
    case FindingKind::ActuatorTamper:
      s.features["target"] = std::to_string(f.target.value);
      break;
  }
  return s;
}

bool KnowledgeBase::learn(const Finding& f) {
  history_.push_back(f);
  return signatures_.insert(signature_of(f)).second;
}

bool KnowledgeBase::flags_malicious_payloads() const {
  return std::any_of(signatures_.begin(), signatures_.end(),
                     [](const Signature& s) { return s.kind == FindingKind::MaliciousPayload; });
}

std::size_t KnowledgeBase::load(std::istream& in) {
  std::size_t added = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (add_signature(Signature::parse(line))) ++added;
  }
  return added;
}

void KnowledgeBase::save(std::ostream& out) const {
  for (const Signature& s : signatures_) out << s.str() << '\n';
}

std::vector<Finding> scan_window(const TrafficWindow& w, const DetectorParams& params, const KnowledgeBase& kb) {
  std::vector<Finding> out;
  std::map<NodeId, std::vector<std::pair<NodeId, std::uint64_t>>> flooders;
  for (const auto& [pair, n] : w.counts) {
    if (n > params.theta) flooders[pair.second].emplace_back(pair.first, n);
  }
  for (const auto& [dst, srcs] : flooders) {
    Finding f;
    f.kind = srcs.size() >= 2 ? FindingKind::DdosFlood : FindingKind::DosFlood;
    f.target = dst;
    f.at = w.end;
    for (const auto& [src, n] : srcs) {
      f.sources.push_back(src);
      f.count += n;
    }
    f.evidence = (srcs.size() >= 2 ? "sources=" : "src=") + join_ids(f.sources) +
                 ";count=" + std::to_string(f.count) + ";window=" + std::to_string(params.window);
    out.push_back(std::move(f));
  }
  for (const auto& [flow, hit] : w.tag_failures) {
    Finding f;
    f.kind = FindingKind::PacketForge;
    f.target = hit.first;
    f.at = w.end;
    f.flow = flow;
    f.count = hit.second;
    f.evidence = "flow=" + std::to_string(flow) + ";failures=" + std::to_string(hit.second);
    out.push_back(std::move(f));
  }
  for (const auto& [subject, n] : w.denials) {
    if (n < params.denials) continue;
    Finding f;
    f.kind = FindingKind::UserPrivEsc;
    f.at = w.end;
    f.subject = subject;
    f.count = n;
    f.evidence = "subject=" + subject + ";denials=" + std::to_string(n);
    out.push_back(std::move(f));
  }
  if (kb.flags_malicious_payloads()) {
    for (const auto& [pair, n] : w.flagged) {
      Finding f;
      f.kind = FindingKind::MaliciousPayload;
      f.target = pair.second;
      f.sources = {pair.first};
      f.at = w.end;
      f.count = n;
      f.evidence = "src=" + std::to_string(pair.first.value) + ";count=" + std::to_string(n);
      out.push_back(std::move(f));
    }
  }
  return out;
}

Inventory audit_map(const NetGraph& graph, const Hierarchy& hierarchy, const std::map<NodeId, Vec2>& locations) {
  Inventory inv;
  for (const auto& [v, role] : graph.vertices()) {
    if (role == NodeRole::Host) continue;
    InventoryItem item{v, role, kNoNode, std::nullopt};
    if (hierarchy.contains(v)) item.owner = hierarchy.parent(v).value_or(kNoNode);
    if (auto it = locations.find(v); it != locations.end()) item.location = it->second;
    inv.emplace(v, item);
  }
  return inv;
}

InventoryDiff diff_inventory(const Inventory& before, const Inventory& after) {
  InventoryDiff d;
  for (const auto& [id, item] : after) {
    if (!before.contains(id)) d.added.push_back(id);
  }
  for (const auto& [id, item] : before) {
    if (!after.contains(id)) d.removed.push_back(id);
  }
  return d;
}

void SecurityController::close_window() {
  for (Finding& f : scan_window(current_, params_, kb_)) {
    // An open finding with the same signature already covers this traffic.
    const Signature sig = signature_of(f);
    const bool open = std::any_of(findings_.begin(), findings_.end(), [&](const Finding& g) {
      return g.state != FindingState::Handled && signature_of(g) == sig;
    });
    if (!open) raise(std::move(f));
  }
  last_closed_ = std::move(current_);
  have_closed_ = true;
  current_ = TrafficWindow{};
  current_.start = last_closed_.end;
  current_.end = last_closed_.end + params_.window;
}

SecurityController::SecurityController(DetectorParams params) : params_(params) {
  if (params_.window == 0) throw Error(ErrorCode::BadValue, "window must be positive");
  current_.end = SimTime{params_.window};
}

void SecurityController::roll(SimTime now) {
  while (now >= current_.end) {
    if (window_empty(current_) && have_closed_ && window_empty(last_closed_)) {
      // Nothing to scan in between; jump to the window containing `now`.
      const std::uint64_t start = now.ticks / params_.window * params_.window;
      current_.start = SimTime{start};
      current_.end = SimTime{start + params_.window};
      break;
    }
    close_window();
  }
}

std::vector<std::uint64_t> SecurityController::advance(SimTime now) {
  roll(now);
  return std::exchange(pending_, {});
}

void SecurityController::observe(const Packet& p, bool tag_failed, SimTime now) {
  roll(now);
  ++current_.counts[{p.src, p.dst}];
  if (tag_failed) {
    auto& [dst, n] = current_.tag_failures[p.flow_id];
    dst = p.dst;
    ++n;
  }
  if (p.malicious_payload) ++current_.flagged[{p.src, p.dst}];
}

void SecurityController::record_denial(const std::string& subject, SimTime now) {
  roll(now);
  ++current_.denials[subject];
}

bool SecurityController::admit(const Packet& p, bool tag_failed, SimTime now) const {
  for (const DropRule& r : rules_) {
    if (!r.active(now)) continue;
    switch (r.kind) {
      case RuleKind::DropFlow:
        if ((r.src == kNoNode || r.src == p.src) && (r.dst == kNoNode || r.dst == p.dst)) return false;
        break;
      case RuleKind::DropUnverified:
        if (tag_failed && r.flow == p.flow_id) return false;
        break;
      case RuleKind::LockSubject:
        break;
    }
  }
  return true;
}

bool SecurityController::subject_locked(const std::string& subject, SimTime now) const {
  return std::any_of(rules_.begin(), rules_.end(), [&](const DropRule& r) {
    return r.kind == RuleKind::LockSubject && r.subject == subject && r.active(now);
  });
}

std::uint64_t SecurityController::raise(Finding f) {
  f.id = findings_.size() + 1;
  f.state = FindingState::Detected;
  log(f.at, f);
  findings_.push_back(std::move(f));
  pending_.push_back(findings_.back().id);
  return findings_.back().id;
}

Finding& SecurityController::mut(std::uint64_t id) {
  if (id == 0 || id > findings_.size()) throw Error(ErrorCode::NotFound, "finding " + std::to_string(id));
  return findings_[id - 1];
}

const Finding& SecurityController::finding(std::uint64_t id) const {
  if (id == 0 || id > findings_.size()) throw Error(ErrorCode::NotFound, "finding " + std::to_string(id));
  return findings_[id - 1];
}

DropRule SecurityController::prevent(std::uint64_t id, SimTime now) {
  Finding& f = mut(id);
  if (f.state == FindingState::Prevented) throw Error(ErrorCode::AlreadyPrevented, "finding " + std::to_string(id));
  if (f.state != FindingState::Detected) throw Error(ErrorCode::InvalidTransition, "finding already handled");
  std::vector<DropRule> fresh;
  switch (f.kind) {
    case FindingKind::DosFlood:
    case FindingKind::DdosFlood:
    case FindingKind::MaliciousPayload:
      for (NodeId s : f.sources) fresh.push_back({id, RuleKind::DropFlow, s, f.target, 0, {}, now, std::nullopt});
      break;
    case FindingKind::PacketForge:
      fresh.push_back({id, RuleKind::DropUnverified, kNoNode, kNoNode, f.flow, {}, now, std::nullopt});
      break;
    case FindingKind::UserPrivEsc:
      fresh.push_back({id, RuleKind::LockSubject, kNoNode, kNoNode, 0, f.subject, now, now + params_.cooldown});
      break;
    case FindingKind::PhantomNode:
      fresh.push_back({id, RuleKind::DropFlow, f.target, kNoNode, 0, {}, now, std::nullopt});
      break;
    case FindingKind::SensorTamper:
    case FindingKind::ActuatorTamper:
      break;
  }
  f.state = FindingState::Prevented;
  log(now, f);
  rules_.insert(rules_.end(), fresh.begin(), fresh.end());
  return fresh.empty() ? DropRule{id, RuleKind::DropFlow, kNoNode, kNoNode, 0, {}, now, now} : fresh.front();
}

HandleResult SecurityController::handle(std::uint64_t id, SimTime now) {
  Finding& f = mut(id);
  if (f.state == FindingState::Handled) throw Error(ErrorCode::InvalidTransition, "finding already handled");
  const SimTime expiry = now + params_.cooldown;
  for (DropRule& r : rules_) {
    if (r.finding == id && (!r.expires || expiry < *r.expires)) r.expires = expiry;
  }
  f.state = FindingState::Handled;
  log(now, f);
  HandleResult out;
  out.new_signature = kb_.learn(f);
  out.reestimate = f.kind == FindingKind::SensorTamper;
  out.restore = f.kind == FindingKind::ActuatorTamper;
  return out;
}

bool SecurityController::quiet_last_window(const Finding& f) const {
  if (!have_closed_ || last_closed_.start < f.at) return false;
  const TrafficWindow& w = last_closed_;
  switch (f.kind) {
    case FindingKind::DosFlood:
    case FindingKind::DdosFlood:
      return std::all_of(f.sources.begin(), f.sources.end(), [&](NodeId s) {
        auto it = w.counts.find({s, f.target});
        return it == w.counts.end() || it->second <= params_.theta;
      });
    case FindingKind::PacketForge:
      return !w.tag_failures.contains(f.flow);
    case FindingKind::UserPrivEsc: {
      auto it = w.denials.find(f.subject);
      return it == w.denials.end() || it->second < params_.denials;
    }
    case FindingKind::MaliciousPayload:
      return !w.flagged.contains({f.sources.front(), f.target});
    case FindingKind::PhantomNode:
    case FindingKind::SensorTamper:
    case FindingKind::ActuatorTamper:
      return true;
  }
  return true;
}

void SecurityController::respond(SimTime now) {
  for (Finding& f : findings_) {
    if (f.state == FindingState::Detected) {
      prevent(f.id, now);
    } else if (f.state == FindingState::Prevented && quiet_last_window(f)) {
      handle(f.id, now);
    }
  }
}

std::vector<std::uint64_t> SecurityController::audit(const NetGraph& graph, const Hierarchy& hierarchy, SimTime now) {
  Inventory inv = audit_map(graph, hierarchy);
  std::vector<std::uint64_t> ids;
  if (baseline_) {
    for (NodeId added : diff_inventory(*baseline_, inv).added) {
      Finding f;
      f.kind = FindingKind::PhantomNode;
      f.target = added;
      f.at = now;
      f.evidence = "node=" + std::to_string(added.value) + ";role=" + std::string(to_string(inv.at(added).role));
      ids.push_back(raise(std::move(f)));
    }
  }
  baseline_ = std::move(inv);
  last_audit_ = now;
  return ids;
}

SecurityStatus SecurityController::status(SimTime now) const {
  SecurityStatus s;
  for (const Finding& f : findings_) {
    switch (f.state) {
      case FindingState::Detected: ++s.detected; break;
      case FindingState::Prevented: ++s.prevented; break;
      case FindingState::Handled: ++s.handled; break;
    }
  }
  s.active_findings = s.detected + s.prevented;
  s.active_rules = static_cast<std::size_t>(
      std::count_if(rules_.begin(), rules_.end(), [&](const DropRule& r) { return r.active(now); }));
  s.last_audit = last_audit_;
  s.kb_size = kb_.size();
  return s;
}

void SecurityController::log(SimTime tick, const Finding& f) {
  std::ostringstream line;
  line << tick.ticks << ',' << to_string(f.kind) << ',';
  if (!f.subject.empty()) {
    line << f.subject;
  } else if (f.target == kNoNode) {
    line << '-';
  } else {
    line << f.target.value;
  }
  line << ',' << to_string(f.state) << ',' << f.evidence;
  log_.push_back(line.str());
  if (out_ != nullptr) *out_ << log_.back() << '\n';
}

}  // namespace sdcps
