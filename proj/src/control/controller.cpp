#include "sdcps/control/controller.hpp"

#include <algorithm>
#include <json.hpp>

#include "sdcps/core/error.hpp"

namespace sdcps {

using nlohmann::json;

namespace {

std::string hex(const std::vector<std::uint8_t>& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    s += kDigits[b >> 4];
    s += kDigits[b & 0xF];
  }
  return s;
}

std::vector<std::uint8_t> unhex(const std::string& s) {
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    throw Error(ErrorCode::ImageMismatch, "bad hex digit");
  };
  if (s.size() % 2 != 0) throw Error(ErrorCode::ImageMismatch, "odd hex length");
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(s[2 * i]) << 4 | nibble(s[2 * i + 1]));
  }
  return out;
}

json rule_json(const DropRule& r) {
  json j = {{"finding", r.finding}, {"kind", static_cast<int>(r.kind)}, {"src", r.src.value}, {"dst", r.dst.value},
            {"flow", r.flow}, {"subject", r.subject}, {"installed", r.installed.ticks}};
  j["expires"] = r.expires ? json(r.expires->ticks) : json(nullptr);
  return j;
}

DropRule rule_from(const json& j) {
  DropRule r;
  r.finding = j.at("finding").get<std::uint64_t>();
  r.kind = static_cast<RuleKind>(j.at("kind").get<int>());
  r.src = NodeId{j.at("src").get<std::uint32_t>()};
  r.dst = NodeId{j.at("dst").get<std::uint32_t>()};
  r.flow = j.at("flow").get<std::uint64_t>();
  r.subject = j.at("subject").get<std::string>();
  r.installed = SimTime{j.at("installed").get<std::uint64_t>()};
  if (!j.at("expires").is_null()) r.expires = SimTime{j.at("expires").get<std::uint64_t>()};
  return r;
}

json policy_json(const PolicySet& p) {
  json rules = json::array();
  for (const PolicyRule& r : p.rules) {
    json j;
    j["subject"] = r.subject_role ? json(*r.subject_role) : json(nullptr);
    j["action"] = r.action ? json(*r.action) : json(nullptr);
    j["object"] = r.object ? json(*r.object) : json(nullptr);
    if (r.condition) {
      j["condition"] = {{"var", r.condition->variable},
                        {"cmp", static_cast<int>(r.condition->cmp)},
                        {"value", r.condition->value}};
    } else {
      j["condition"] = nullptr;
    }
    j["effect"] = to_string(r.effect);
    rules.push_back(std::move(j));
  }
  return {{"rules", rules}, {"default", to_string(p.default_effect)}};
}

PolicySet policy_from(const json& j) {
  PolicySet p;
  auto opt = [](const json& v) -> std::optional<std::string> {
    if (v.is_null()) return std::nullopt;
    return v.get<std::string>();
  };
  for (const json& r : j.at("rules")) {
    PolicyRule rule;
    rule.subject_role = opt(r.at("subject"));
    rule.action = opt(r.at("action"));
    rule.object = opt(r.at("object"));
    if (!r.at("condition").is_null()) {
      const json& c = r.at("condition");
      rule.condition = Condition{c.at("var").get<std::string>(), static_cast<Comparison>(c.at("cmp").get<int>()),
                                 c.at("value").get<double>()};
    }
    rule.effect = effect_from_string(r.at("effect").get<std::string>());
    p.rules.push_back(std::move(rule));
  }
  p.default_effect = effect_from_string(j.at("default").get<std::string>());
  return p;
}

json qos_json(const QosRules& q) {
  json rules = json::array();
  for (const QosRule& r : q.rules) {
    rules.push_back({{"kind", r.kind ? json(static_cast<int>(*r.kind)) : json(nullptr)},
                     {"emergency", r.emergency_only},
                     {"priority", r.priority}});
  }
  return {{"rules", rules}, {"emergency_flows", q.emergency_flows}, {"default", q.default_priority}};
}

QosRules qos_from(const json& j) {
  QosRules q;
  for (const json& r : j.at("rules")) {
    QosRule rule;
    if (!r.at("kind").is_null()) rule.kind = static_cast<PacketKind>(r.at("kind").get<int>());
    rule.emergency_only = r.at("emergency").get<bool>();
    rule.priority = r.at("priority").get<int>();
    q.rules.push_back(rule);
  }
  q.emergency_flows = j.at("emergency_flows").get<std::set<std::uint64_t>>();
  q.default_priority = j.at("default").get<int>();
  return q;
}

json node_json(const ControllerNode& n) {
  json j;
  j["id"] = n.id.value;
  j["role"] = to_string(n.role);
  j["parent"] = n.parent.value;
  json children = json::array();
  for (NodeId c : n.children) children.push_back(c.value);
  j["children"] = children;

  json entries = json::array();
  for (const auto& [dst, hop] : n.table.entries) entries.push_back({dst.value, hop.value});
  j["sdn"] = {{"owner", n.table.owner.value}, {"epoch", n.table.epoch}, {"entries", entries}};

  json devices = json::array();
  for (const auto& [id, d] : n.devices.records()) {
    devices.push_back({{"id", id.value},
                       {"kind", to_string(d.kind)},
                       {"status", to_string(d.status)},
                       {"x", d.location.x},
                       {"y", d.location.y},
                       {"last_seen", d.last_seen.ticks},
                       {"owner", d.owner.value}});
  }
  j["sdiot"] = devices;

  json keys = json::object();
  for (const auto& [k, d] : n.storage.keys()) keys[k] = d;
  json blobs = json::object();
  for (const auto& [d, bytes] : n.storage.blobs()) blobs[std::to_string(d)] = hex(bytes);
  j["sds"] = {{"keys", keys}, {"blobs", blobs}, {"capacity", n.storage.cache_capacity()}};

  const ComputeController& c = n.compute;
  j["sdcompute"] = {{"id", c.id.value},       {"cpu_capacity", c.cpu_capacity}, {"mem_capacity", c.mem_capacity},
                    {"cpu_used", c.cpu_used}, {"mem_used", c.mem_used},         {"tasks", c.tasks}};

  json sigs = json::array();
  for (const Signature& s : n.security.kb().signatures()) sigs.push_back(s.str());
  json rules = json::array();
  for (const DropRule& r : n.security.rules()) rules.push_back(rule_json(r));
  j["sdsecurity"] = {{"signatures", sigs}, {"rules", rules}};

  j["organizer"] = qos_json(n.qos);
  j["policy"] = policy_json(n.policies);
  return j;
}

}  // namespace

std::string_view to_string(ControllerStatus s) {
  switch (s) {
    case ControllerStatus::Init: return "INIT";
    case ControllerStatus::Running: return "RUNNING";
    case ControllerStatus::Failed: return "FAILED";
  }
  return "?";
}

std::string_view to_string(DecisionOutcome o) {
  switch (o) {
    case DecisionOutcome::Granted: return "GRANTED";
    case DecisionOutcome::Denied: return "DENIED";
    case DecisionOutcome::Escalated: return "ESCALATED";
    case DecisionOutcome::Timeout: return "TIMEOUT";
  }
  return "?";
}

ControllerImage capture_image(const ControllerNode& node, SimTime now) {
  if (node.status == ControllerStatus::Failed) {
    throw Error(ErrorCode::DeadController, "cannot image failed controller " + std::to_string(node.id.value));
  }
  return {node.id, now, node_json(node).dump()};
}

void restore_image(ControllerNode& node, const ControllerImage& image) {
  if (image.controller != node.id) {
    throw Error(ErrorCode::ImageMismatch, "image of " + std::to_string(image.controller.value) + " offered to " +
                                              std::to_string(node.id.value));
  }
  try {
    const json j = json::parse(image.bytes);
    if (j.at("id").get<std::uint32_t>() != node.id.value) throw Error(ErrorCode::ImageMismatch, "id field differs");
    ControllerNode fresh_state = node;  // build aside, commit at the end

    fresh_state.role = node_role_from_string(j.at("role").get<std::string>());
    fresh_state.parent = NodeId{j.at("parent").get<std::uint32_t>()};
    fresh_state.children.clear();
    for (const json& c : j.at("children")) fresh_state.children.push_back(NodeId{c.get<std::uint32_t>()});

    const json& sdn = j.at("sdn");
    fresh_state.table = ForwardingTable{NodeId{sdn.at("owner").get<std::uint32_t>()}, {}, sdn.at("epoch").get<std::uint64_t>()};
    for (const json& e : sdn.at("entries")) {
      fresh_state.table.entries[NodeId{e.at(0).get<std::uint32_t>()}] = NodeId{e.at(1).get<std::uint32_t>()};
    }

    std::map<NodeId, DeviceRecord> devices;
    for (const json& d : j.at("sdiot")) {
      DeviceRecord r;
      r.id = NodeId{d.at("id").get<std::uint32_t>()};
      r.kind = device_kind_from_string(d.at("kind").get<std::string>());
      r.status = device_status_from_string(d.at("status").get<std::string>());
      r.location = {d.at("x").get<double>(), d.at("y").get<double>()};
      r.last_seen = SimTime{d.at("last_seen").get<std::uint64_t>()};
      r.owner = NodeId{d.at("owner").get<std::uint32_t>()};
      devices.emplace(r.id, r);
    }
    fresh_state.devices.replace(std::move(devices));

    const json& sds = j.at("sds");
    std::map<std::string, std::uint64_t> keys;
    for (const auto& [k, v] : sds.at("keys").items()) keys[k] = v.get<std::uint64_t>();
    std::map<std::uint64_t, std::vector<std::uint8_t>> blobs;
    for (const auto& [k, v] : sds.at("blobs").items()) blobs[std::stoull(k)] = unhex(v.get<std::string>());
    fresh_state.storage = StorageController(sds.at("capacity").get<std::size_t>());
    fresh_state.storage.replace(std::move(keys), std::move(blobs));

    const json& c = j.at("sdcompute");
    fresh_state.compute = ComputeController{NodeId{c.at("id").get<std::uint32_t>()},
                                            c.at("cpu_capacity").get<double>(),
                                            c.at("mem_capacity").get<double>(),
                                            c.at("cpu_used").get<double>(),
                                            c.at("mem_used").get<double>(),
                                            c.at("tasks").get<std::size_t>()};

    std::set<Signature> sigs;
    for (const json& s : j.at("sdsecurity").at("signatures")) sigs.insert(Signature::parse(s.get<std::string>()));
    std::vector<DropRule> rules;
    for (const json& r : j.at("sdsecurity").at("rules")) rules.push_back(rule_from(r));
    fresh_state.security.kb().replace_signatures(std::move(sigs));
    fresh_state.security.replace_rules(std::move(rules));

    fresh_state.qos = qos_from(j.at("organizer"));
    fresh_state.policies = policy_from(j.at("policy"));
    node = std::move(fresh_state);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ImageMismatch, std::string("malformed image: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ImageMismatch) throw;
    throw Error(ErrorCode::ImageMismatch, e.what());
  }
}

Decision handle_request(const Hierarchy& hierarchy, const std::map<NodeId, ControllerNode>& controllers,
                        const Request& request, SimTime now, const DecisionParams& params, std::ostream* log) {
  auto node = [&](NodeId id) -> const ControllerNode& {
    auto it = controllers.find(id);
    if (it == controllers.end()) throw Error(ErrorCode::UnknownNode, "controller " + std::to_string(id.value));
    return it->second;
  };
  auto write = [&](SimTime t, DecisionOutcome o, NodeId who, int depth) {
    if (log != nullptr) *log << t.ticks << ',' << request.id << ',' << to_string(o) << ',' << who.value << ',' << depth << '\n';
  };
  if (node(request.origin).status == ControllerStatus::Failed) {
    throw Error(ErrorCode::DeadController, "receiving controller " + std::to_string(request.origin.value));
  }

  NodeId cur = request.origin;
  SimTime t = now;
  int depth = 0;
  for (;;) {
    const ControllerNode& c = node(cur);
    const bool owned = std::all_of(request.entities.begin(), request.entities.end(), [&](NodeId e) {
      return hierarchy.contains(e) && hierarchy.is_ancestor_or_self(cur, e);
    });
    const PolicyDecision pd = check_policy(c.policies, request.subject_role, request.action, request.object, request.state);
    if (owned && pd.rule) {
      Decision d{request.id, pd.effect == Effect::Allow ? DecisionOutcome::Granted : DecisionOutcome::Denied, cur,
                 depth, depth == 0 ? "self" : "coordinated", t};
      write(t, d.outcome, cur, depth);
      return d;
    }
    const auto parent = hierarchy.parent(cur);
    if (!parent) {
      Decision d{request.id, DecisionOutcome::Denied, cur, depth, "Unresolvable", t};
      write(t, d.outcome, cur, depth);
      return d;
    }
    if (node(*parent).status == ControllerStatus::Failed) {
      throw Error(ErrorCode::DeadController, "parent " + std::to_string(parent->value) + " has failed");
    }
    auto lat = params.latency_to_parent.find(cur);
    const std::uint64_t hop = lat != params.latency_to_parent.end() ? lat->second : params.hop_latency;
    write(t, DecisionOutcome::Escalated, cur, depth);
    if (hop > params.hop_timeout) {
      Decision d{request.id, DecisionOutcome::Timeout, cur, depth, "hop timeout", t + params.hop_timeout};
      write(d.at, d.outcome, cur, depth);
      return d;
    }
    t = t + hop;
    cur = *parent;
    ++depth;
  }
}

}  // namespace sdcps
