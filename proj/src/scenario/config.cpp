#include "sdcps/scenario/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdcps/core/error.hpp"

namespace sdcps {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::ConfigInvalid, why); }

void require(bool ok, const std::string& why) {
  if (!ok) invalid(why);
}

// Fails on keys outside `allowed` so typos do not pass silently.
void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  require(obj.is_object(), where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    require(known, "unknown key " + where + "." + key);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

Matrix matrix_from(const json& j, const std::string& what) {
  require(j.is_array() && !j.empty(), what + " must be a non-empty array of rows");
  const std::size_t cols = j.at(0).size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    require(j[r].is_array() && j[r].size() == cols, what + " rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Vector vector_from(const json& j, const std::string& what) {
  require(j.is_array() && !j.empty(), what + " must be a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

PlantConfig plant_from(const json& j) {
  check_keys(j, "plant",
             {"A", "B", "C", "D", "x0", "gain", "control_period", "tamper_threshold", "process_noise_std",
              "measurement_noise_std"});
  PlantConfig p = default_plant();
  if (j.contains("A")) p.model.A = matrix_from(j["A"], "plant.A");
  if (j.contains("B")) p.model.B = matrix_from(j["B"], "plant.B");
  if (j.contains("C")) {
    p.model.C = matrix_from(j["C"], "plant.C");
  } else {
    p.model.C = Matrix::Identity(p.model.A.rows(), p.model.A.cols());
  }
  if (j.contains("D")) {
    p.model.D = matrix_from(j["D"], "plant.D");
  } else {
    p.model.D = Matrix::Zero(p.model.C.rows(), p.model.B.cols());
  }
  if (j.contains("x0")) {
    p.x0 = vector_from(j["x0"], "plant.x0");
  } else {
    p.x0 = Vector::Ones(p.model.A.rows());
  }
  if (j.contains("gain")) {
    p.gain = matrix_from(j["gain"], "plant.gain");
  } else if (p.gain.rows() != p.model.B.cols() || p.gain.cols() != p.model.A.rows()) {
    p.gain = Matrix::Zero(p.model.B.cols(), p.model.A.rows());
  }
  read(j, "control_period", p.control_period);
  read(j, "tamper_threshold", p.tamper_threshold);
  read(j, "process_noise_std", p.model.process_noise_std);
  read(j, "measurement_noise_std", p.model.measurement_noise_std);
  return p;
}

AttackSpec attack_from(const json& j, std::uint64_t index) {
  check_keys(j, "attacks[]", {"kind", "start", "stop", "target", "edge", "rate", "sources", "flow", "bias", "value", "action"});
  AttackSpec a;
  a.id = index;
  require(j.contains("kind"), "attack needs a kind");
  a.kind = attack_kind_from_string(j["kind"].get<std::string>());
  a.start = SimTime{j.value("start", std::uint64_t{0})};
  a.stop = SimTime{j.value("stop", std::uint64_t{0})};
  if (j.contains("target")) a.target = NodeId{j["target"].get<std::uint32_t>()};
  if (j.contains("edge")) {
    const auto e = j["edge"].get<std::vector<std::uint32_t>>();
    require(e.size() == 2, "attack edge needs two endpoints");
    a.edge = std::pair{NodeId{e[0]}, NodeId{e[1]}};
  }
  read(j, "rate", a.rate);
  for (std::uint32_t s : j.value("sources", std::vector<std::uint32_t>{})) a.sources.push_back(NodeId{s});
  read(j, "flow", a.flow_id);
  read(j, "bias", a.bias);
  read(j, "value", a.value);
  read(j, "action", a.action);
  return a;
}

json attack_json(const AttackSpec& a) {
  json j;
  j["kind"] = to_string(a.kind);
  j["start"] = a.start.ticks;
  j["stop"] = a.stop.ticks;
  if (a.target != kNoNode) j["target"] = a.target.value;
  if (a.edge) j["edge"] = {a.edge->first.value, a.edge->second.value};
  j["rate"] = a.rate;
  json sources = json::array();
  for (NodeId s : a.sources) sources.push_back(s.value);
  j["sources"] = sources;
  j["flow"] = a.flow_id;
  j["bias"] = a.bias;
  j["value"] = a.value;
  j["action"] = a.action;
  return j;
}

ScenarioSpec scenario_from(ScenarioId id, const json& j) {
  check_keys(j, "scenarios." + std::string(to_string(id)),
             {"values", "sim_times", "pairs", "requests", "sim_time", "time_limit", "seeds"});
  ScenarioSpec s = ScenarioSpec::defaults(id);
  read(j, "values", s.values);
  read(j, "sim_times", s.sim_times);
  if (j.contains("pairs")) {
    s.pairs.clear();
    for (const json& p : j["pairs"]) {
      const auto v = p.get<std::vector<int>>();
      require(v.size() == 2, "Sc4 pairs are [n_local, hosts_per_switch]");
      s.pairs.emplace_back(v[0], v[1]);
    }
  }
  read(j, "requests", s.requests);
  read(j, "sim_time", s.sim_time);
  read(j, "time_limit", s.time_limit);
  read(j, "seeds", s.seeds);
  return s;
}

json scenario_json(const ScenarioSpec& s) {
  json j;
  j["values"] = s.values;
  j["sim_times"] = s.sim_times;
  json pairs = json::array();
  for (const auto& [a, b] : s.pairs) pairs.push_back({a, b});
  j["pairs"] = pairs;
  j["requests"] = s.requests;
  j["sim_time"] = s.sim_time;
  j["time_limit"] = s.time_limit;
  j["seeds"] = s.seeds;
  return j;
}

SystemConfig config_from(const json& doc) {
  check_keys(doc, "config",
             {"topology", "seed", "routing", "capacity", "traffic", "scheduler", "resilience", "security", "plant",
              "attacks", "failures", "down_links", "scenarios"});
  SystemConfig c;
  if (doc.contains("topology")) {
    const json& t = doc["topology"];
    check_keys(t, "topology", {"n_local", "switches_per_local", "hosts_per_switch", "partitions"});
    read(t, "n_local", c.n_local);
    read(t, "switches_per_local", c.switches_per_local);
    read(t, "hosts_per_switch", c.hosts_per_switch);
    read(t, "partitions", c.partitions);
  }
  read(doc, "seed", c.seed);
  if (doc.contains("routing")) c.routing = route_policy_from_string(doc["routing"].get<std::string>());
  if (doc.contains("capacity")) {
    const json& k = doc["capacity"];
    check_keys(k, "capacity", {"global", "local", "switch", "host", "link_latency"});
    read(k, "global", c.capacity.global);
    read(k, "local", c.capacity.local);
    read(k, "switch", c.capacity.switch_cap);
    read(k, "host", c.capacity.host);
    read(k, "link_latency", c.capacity.link_latency);
  }
  if (doc.contains("traffic")) {
    const json& t = doc["traffic"];
    check_keys(t, "traffic", {"packets_per_request", "request_timeout", "pattern", "payload_bytes"});
    read(t, "packets_per_request", c.traffic.packets_per_request);
    read(t, "request_timeout", c.traffic.request_timeout);
    read(t, "payload_bytes", c.traffic.payload_bytes);
    if (t.contains("pattern")) {
      const auto p = t["pattern"].get<std::string>();
      require(p == "uniform" || p == "ring", "traffic.pattern must be uniform or ring");
      c.traffic.pattern = p == "ring" ? TrafficPattern::Ring : TrafficPattern::Uniform;
    }
  }
  if (doc.contains("scheduler")) {
    check_keys(doc["scheduler"], "scheduler", {"source_bins"});
    read(doc["scheduler"], "source_bins", c.scheduler.source_bins);
  }
  if (doc.contains("resilience")) {
    check_keys(doc["resilience"], "resilience", {"heartbeat_period", "max_missed"});
    read(doc["resilience"], "heartbeat_period", c.resilience.heartbeat_period);
    read(doc["resilience"], "max_missed", c.resilience.max_missed);
  }
  if (doc.contains("security")) {
    const json& s = doc["security"];
    check_keys(s, "security", {"theta", "window", "denials", "cooldown", "authenticate", "encrypt"});
    read(s, "theta", c.security.detector.theta);
    read(s, "window", c.security.detector.window);
    read(s, "denials", c.security.detector.denials);
    read(s, "cooldown", c.security.detector.cooldown);
    read(s, "authenticate", c.security.authenticate);
    read(s, "encrypt", c.security.encrypt);
  }
  if (doc.contains("plant") && !doc["plant"].is_null()) c.plant = plant_from(doc["plant"]);
  if (doc.contains("attacks")) {
    require(doc["attacks"].is_array(), "attacks must be an array");
    for (std::size_t i = 0; i < doc["attacks"].size(); ++i) c.attacks.push_back(attack_from(doc["attacks"][i], i + 1));
  }
  if (doc.contains("failures")) {
    require(doc["failures"].is_array(), "failures must be an array");
    for (const json& f : doc["failures"]) {
      check_keys(f, "failures[]", {"controller", "at"});
      require(f.contains("controller") && f.contains("at"), "failure needs controller and at");
      c.failures.push_back({NodeId{f["controller"].get<std::uint32_t>()}, SimTime{f["at"].get<std::uint64_t>()}});
    }
  }
  if (doc.contains("down_links")) {
    for (const json& l : doc["down_links"]) {
      const auto e = l.get<std::vector<std::uint32_t>>();
      require(e.size() == 2, "down_links entries are [a, b]");
      c.down_links.emplace_back(NodeId{e[0]}, NodeId{e[1]});
    }
  }
  if (doc.contains("scenarios")) {
    require(doc["scenarios"].is_object(), "scenarios must be an object");
    for (const auto& [key, value] : doc["scenarios"].items()) {
      ScenarioId id{};
      try {
        id = scenario_id_from_string(key);
      } catch (const Error&) {
        invalid("unknown scenario " + key);
      }
      c.scenarios[id] = scenario_from(id, value);
    }
  }
  return c;
}

}  // namespace

std::string_view to_string(TrafficPattern p) { return p == TrafficPattern::Ring ? "ring" : "uniform"; }

std::string_view to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::Sc1: return "Sc1";
    case ScenarioId::Sc2: return "Sc2";
    case ScenarioId::Sc3: return "Sc3";
    case ScenarioId::Sc4: return "Sc4";
  }
  return "?";
}

ScenarioId scenario_id_from_string(std::string_view s) {
  for (ScenarioId id : {ScenarioId::Sc1, ScenarioId::Sc2, ScenarioId::Sc3, ScenarioId::Sc4}) {
    if (to_string(id) == s) return id;
  }
  throw Error(ErrorCode::BadValue, "unknown scenario " + std::string(s));
}

ScenarioSpec ScenarioSpec::defaults(ScenarioId id) {
  ScenarioSpec s;
  s.id = id;
  switch (id) {
    case ScenarioId::Sc1:
    case ScenarioId::Sc2:
      s.values = {2, 4, 8, 16};
      break;
    case ScenarioId::Sc3:
      s.sim_times = {2000, 4000, 8000, 16000, 32000};
      break;
    case ScenarioId::Sc4:
      s.pairs = {{4, 16}, {8, 8}, {16, 4}};
      break;
  }
  return s;
}

std::uint32_t SystemConfig::vertex_count() const {
  const auto l = static_cast<std::uint32_t>(n_local);
  const auto s = l * static_cast<std::uint32_t>(switches_per_local);
  return 1 + l + s + s * static_cast<std::uint32_t>(hosts_per_switch);
}

ScenarioSpec SystemConfig::scenario(ScenarioId id) const {
  auto it = scenarios.find(id);
  return it != scenarios.end() ? it->second : ScenarioSpec::defaults(id);
}

PlantConfig default_plant() {
  PlantConfig p;
  p.model = PlantModel::fully_observed(Matrix::Constant(1, 1, 0.9), Matrix::Constant(1, 1, 1.0));
  p.x0 = Vector::Ones(1);
  p.gain = Matrix::Constant(1, 1, -0.5);
  return p;
}

void validate_scenario(const ScenarioSpec& s) {
  const std::string name(to_string(s.id));
  require(!s.seeds.empty(), name + " needs at least one seed");
  switch (s.id) {
    case ScenarioId::Sc1:
    case ScenarioId::Sc2:
      require(!s.values.empty(), name + " needs swept values");
      for (int v : s.values) require(v >= 1, name + " values must be positive");
      require(s.sim_times.empty() && s.pairs.empty(), name + " sweeps a single count");
      require(s.requests >= 1, name + " needs a request budget");
      require(s.time_limit >= 1, name + " needs a time limit");
      break;
    case ScenarioId::Sc3:
      require(!s.sim_times.empty(), "Sc3 needs sim_times");
      for (std::uint64_t t : s.sim_times) require(t >= 1, "Sc3 sim_times must be positive");
      require(s.values.empty() && s.pairs.empty(), "Sc3 sweeps time only");
      break;
    case ScenarioId::Sc4: {
      require(!s.pairs.empty(), "Sc4 needs pairs");
      require(s.values.empty() && s.sim_times.empty(), "Sc4 sweeps pairs only");
      require(s.sim_time >= 1, "Sc4 needs a positive sim_time");
      const long product = static_cast<long>(s.pairs.front().first) * s.pairs.front().second;
      for (const auto& [l, h] : s.pairs) {
        require(l >= 1 && h >= 1, "Sc4 pairs must be positive");
        require(static_cast<long>(l) * h == product, "Sc4 pairs must keep n_local * hosts_per_switch fixed");
      }
      break;
    }
  }
}

void validate_config(const SystemConfig& c) {
  require(c.n_local >= 1 && c.switches_per_local >= 1 && c.hosts_per_switch >= 1, "topology counts must be positive");
  require(c.partitions >= 1, "partitions must be positive");
  require(c.partitions <= c.n_local, "partitions must not exceed n_local");
  require(c.capacity.global >= 1 && c.capacity.local >= 1 && c.capacity.switch_cap >= 1 && c.capacity.host >= 1,
          "capacities must be positive");
  require(c.capacity.link_latency >= 1, "link_latency must be positive");
  require(c.traffic.packets_per_request >= 1, "packets_per_request must be positive");
  require(c.traffic.request_timeout >= 1, "request_timeout must be positive");
  require(c.resilience.heartbeat_period >= 1 && c.resilience.max_missed >= 1, "heartbeat settings must be positive");
  require(c.security.detector.window >= 1 && c.security.detector.theta >= 1 && c.security.detector.denials >= 1,
          "detector settings must be positive");
  require(!c.security.encrypt || c.security.authenticate, "encrypt requires authenticate");

  if (c.plant) {
    const PlantConfig& p = *c.plant;
    try {
      p.model.validate();
    } catch (const Error& e) {
      invalid(std::string("plant: ") + e.what());
    }
    require(p.x0.size() == p.model.states(), "plant.x0 must have one entry per state");
    require(p.gain.rows() == p.model.inputs() && p.gain.cols() == p.model.states(), "plant.gain must be inputs x states");
    require(p.control_period >= 1, "plant.control_period must be positive");
  }

  const std::uint32_t v = c.vertex_count();
  auto exists = [&](NodeId id) { return id.value < v; };
  const std::uint32_t first_host = v - static_cast<std::uint32_t>(c.n_local * c.switches_per_local * c.hosts_per_switch);
  for (const AttackSpec& a : c.attacks) {
    try {
      validate(a);
    } catch (const Error& e) {
      invalid(std::string("attack: ") + e.what());
    }
    require(a.target == kNoNode || exists(a.target), "attack target out of range");
    for (NodeId s : a.sources) require(exists(s) && s.value >= first_host, "attack sources must be hosts");
    if (a.edge) require(exists(a.edge->first) && exists(a.edge->second), "attack edge out of range");
    if (a.kind == AttackKind::SensorTamper || a.kind == AttackKind::ActuatorTamper) {
      require(c.plant.has_value(), "tamper attacks need a plant section");
      require(a.target.value >= first_host, "tamper target must be a host plant");
    }
  }
  for (const FailureSpec& f : c.failures) {
    require(exists(f.controller), "failure controller out of range");
    require(f.controller.value != 0, "the global controller cannot be failed");
    require(f.controller.value < first_host, "hosts are not failable controllers");
  }
  for (const auto& [a, b] : c.down_links) require(exists(a) && exists(b) && a != b, "down_links endpoint out of range");
  for (const auto& [id, s] : c.scenarios) validate_scenario(s);
}

SystemConfig parse_config(std::string_view text) {
  SystemConfig c;
  try {
    c = config_from(json::parse(text));
  } catch (const json::exception& e) {
    invalid(std::string("malformed document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    invalid(e.what());
  }
  validate_config(c);
  return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_to_json(const SystemConfig& c) {
  json doc;
  doc["topology"] = {{"n_local", c.n_local},
                     {"switches_per_local", c.switches_per_local},
                     {"hosts_per_switch", c.hosts_per_switch},
                     {"partitions", c.partitions}};
  doc["seed"] = c.seed;
  doc["routing"] = to_string(c.routing);
  doc["capacity"] = {{"global", c.capacity.global},
                     {"local", c.capacity.local},
                     {"switch", c.capacity.switch_cap},
                     {"host", c.capacity.host},
                     {"link_latency", c.capacity.link_latency}};
  doc["traffic"] = {{"packets_per_request", c.traffic.packets_per_request},
                    {"request_timeout", c.traffic.request_timeout},
                    {"pattern", to_string(c.traffic.pattern)},
                    {"payload_bytes", c.traffic.payload_bytes}};
  doc["scheduler"] = {{"source_bins", c.scheduler.source_bins}};
  doc["resilience"] = {{"heartbeat_period", c.resilience.heartbeat_period},
                       {"max_missed", c.resilience.max_missed}};
  doc["security"] = {{"theta", c.security.detector.theta},
                     {"window", c.security.detector.window},
                     {"denials", c.security.detector.denials},
                     {"cooldown", c.security.detector.cooldown},
                     {"authenticate", c.security.authenticate},
                     {"encrypt", c.security.encrypt}};
  if (c.plant) {
    const PlantConfig& p = *c.plant;
    json x0 = json::array();
    for (Eigen::Index i = 0; i < p.x0.size(); ++i) x0.push_back(p.x0(i));
    doc["plant"] = {{"A", matrix_json(p.model.A)},
                    {"B", matrix_json(p.model.B)},
                    {"C", matrix_json(p.model.C)},
                    {"D", matrix_json(p.model.D)},
                    {"x0", x0},
                    {"gain", matrix_json(p.gain)},
                    {"control_period", p.control_period},
                    {"tamper_threshold", p.tamper_threshold},
                    {"process_noise_std", p.model.process_noise_std},
                    {"measurement_noise_std", p.model.measurement_noise_std}};
  }
  json attacks = json::array();
  for (const AttackSpec& a : c.attacks) attacks.push_back(attack_json(a));
  doc["attacks"] = attacks;
  json failures = json::array();
  for (const FailureSpec& f : c.failures) failures.push_back({{"controller", f.controller.value}, {"at", f.at.ticks}});
  doc["failures"] = failures;
  json links = json::array();
  for (const auto& [a, b] : c.down_links) links.push_back({a.value, b.value});
  doc["down_links"] = links;
  json scenarios = json::object();
  for (const auto& [id, s] : c.scenarios) scenarios[std::string(to_string(id))] = scenario_json(s);
  doc["scenarios"] = scenarios;
  return doc.dump(2);
}

}  // namespace sdcps
