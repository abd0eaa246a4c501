#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <ranges>
#include <set>
#include <sstream>

#include "sdcps/core/error.hpp"
#include "sdcps/scenario/config.hpp"
#include "sdcps/scenario/scenario.hpp"
#include "sdcps/scenario/simulation.hpp"
#include "sdcps/scenario/system.hpp"

using namespace sdcps;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an sdcps::Error");
  return ErrorCode::BadValue;
}

SystemConfig small(int l, int s, int h) {
  SystemConfig c;
  c.n_local = l;
  c.switches_per_local = s;
  c.hosts_per_switch = h;
  return c;
}

// Counted step by step from the bring-up description, P partitions, no plant.
std::uint64_t expected_work(std::uint64_t l, std::uint64_t s, std::uint64_t h, std::uint64_t p) {
  const std::uint64_t v = 1 + l + l * s + l * s * h;
  const std::uint64_t per_unit = default_policies().rules.size() + QosRules::defaults().rules.size() + 3;
  return 1                    // global controller
         + v                  // controller objects
         + l + p + p + l      // partition members, partitions, area and local lists
         + v * (v - 1)        // table entries
         + l * s * (1 + h)    // device records held by locals
         + v * per_unit       // policies, qos, security, compute, storage
         + v + v + v;         // running, captured, forwarded
}

// Fixed topology of the sweep tests: global 0, locals 1..4, switches 5..12, hosts 13..44.
constexpr NodeId kHost0{13};
constexpr NodeId kHost5{18};
constexpr NodeId kSwitch0{5};
constexpr NodeId kLocal0{1};

bool owned_by_live(const System& sys, NodeId id) {
  return std::ranges::any_of(sys.controllers, [&](const auto& kv) {
    return kv.second.status != ControllerStatus::Failed && kv.second.devices.contains(id);
  });
}

}  // namespace

TEST_CASE("defaults parse from an empty document") {
  const SystemConfig c = parse_config("{}");
  CHECK(c.n_local == 8);
  CHECK(c.switches_per_local == 2);
  CHECK(c.hosts_per_switch == 8);
  CHECK(c.vertex_count() == 153);
  CHECK(c.scenario(ScenarioId::Sc4).pairs == std::vector<std::pair<int, int>>{{4, 16}, {8, 8}, {16, 4}});
}

TEST_CASE("config rejections") {
  CHECK(code_of([] { parse_config(R"({"topology": {"n_locals": 3}})"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { parse_config(R"({"bogus": 1})"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { parse_config(R"({"topology": {"n_local": 2, "partitions": 3}})"); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(code_of([] { parse_config(R"({"topology": {"n_local": "two"}})"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { parse_config("{not json"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { parse_config(R"({"security": {"encrypt": true}})"); }) == ErrorCode::ConfigInvalid);
  CHECK(code_of([] { parse_config(R"({"failures": [{"controller": 0, "at": 10}]})"); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(code_of([] { parse_config(R"({"scenarios": {"Sc4": {"pairs": [[4, 16], [8, 4]]}}})"); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("config survives its own serialization") {
  const std::string text = R"({
    "topology": {"n_local": 4, "switches_per_local": 2, "hosts_per_switch": 4, "partitions": 2},
    "seed": 7,
    "routing": "MST",
    "capacity": {"global": 5, "local": 3, "switch": 2, "host": 1, "link_latency": 2},
    "traffic": {"packets_per_request": 4, "request_timeout": 500, "pattern": "ring", "payload_bytes": 24},
    "scheduler": {"source_bins": false},
    "resilience": {"heartbeat_period": 10, "max_missed": 2},
    "security": {"theta": 10, "window": 40, "denials": 2, "cooldown": 100, "authenticate": true, "encrypt": true},
    "plant": {"A": [[0.9]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]], "x0": [2.0], "gain": [[-0.5]],
              "control_period": 50, "tamper_threshold": 0.25},
    "attacks": [{"kind": "DOS_FLOOD", "start": 100, "stop": 200, "target": 20, "rate": 0.5, "sources": [13]}],
    "failures": [{"controller": 2, "at": 300}],
    "down_links": [[5, 6]],
    "scenarios": {"Sc3": {"sim_times": [100, 200], "seeds": [1, 2]}}
  })";
  const SystemConfig c = parse_config(text);
  CHECK(c.partitions == 2);
  CHECK(c.routing == RoutePolicy::Mst);
  CHECK(c.traffic.pattern == TrafficPattern::Ring);
  CHECK(c.attacks.at(0).id == 1);
  CHECK(c.attacks.at(0).kind == AttackKind::DosFlood);
  REQUIRE(c.plant);
  CHECK(c.plant->control_period == 50);

  const std::string once = config_to_json(c);
  const SystemConfig back = parse_config(once);
  CHECK(config_to_json(back) == once);
  CHECK(back.capacity == c.capacity);
  CHECK(back.traffic == c.traffic);
  CHECK(back.security == c.security);
  CHECK(back.failures == c.failures);
  CHECK(back.down_links == c.down_links);
  CHECK(back.scenarios == c.scenarios);
}

TEST_CASE("scenario ids and default rows") {
  for (ScenarioId id : {ScenarioId::Sc1, ScenarioId::Sc2, ScenarioId::Sc3, ScenarioId::Sc4}) {
    CHECK(scenario_id_from_string(to_string(id)) == id);
    CHECK_NOTHROW(validate_scenario(ScenarioSpec::defaults(id)));
  }
  CHECK(code_of([] { scenario_id_from_string("Sc5"); }) == ErrorCode::BadValue);
  CHECK(ScenarioSpec::defaults(ScenarioId::Sc1).values == std::vector<int>{2, 4, 8, 16});
  CHECK(ScenarioSpec::defaults(ScenarioId::Sc3).sim_times.size() == 5);

  ScenarioSpec empty = ScenarioSpec::defaults(ScenarioId::Sc3);
  empty.sim_times.clear();
  CHECK(code_of([&] { validate_scenario(empty); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("cells come out value-major, seed-minor") {
  ScenarioSpec spec = ScenarioSpec::defaults(ScenarioId::Sc2);
  spec.values = {2, 4};
  spec.seeds = {1, 2};
  const auto cells = scenario_cells(spec, small(3, 2, 8));
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].hosts_per_switch == 2);
  CHECK(cells[0].seed == 1);
  CHECK(cells[1].hosts_per_switch == 2);
  CHECK(cells[1].seed == 2);
  CHECK(cells[3].hosts_per_switch == 4);
  for (const Cell& c : cells) {
    CHECK(c.n_local == 3);
    CHECK(c.requests == 10000u);
  }
}

TEST_CASE("setup of the smallest hierarchy") {
  const System sys = setup(small(1, 1, 1));
  CHECK(sys.controller_list.size() == 4);
  CHECK(sys.root_images.size() == 4);
  CHECK(sys.images_forwarded == 4);
  CHECK(sys.local_list == std::vector<NodeId>{NodeId{1}});
  CHECK(sys.super_list.size() == 1);
  for (const auto& [id, n] : sys.controllers) {
    CHECK(n.status == ControllerStatus::Running);
    CHECK(n.established);
    CHECK(n.table.entries.size() == 3);
  }
  REQUIRE(sys.setup_log.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(sys.setup_log[i].starts_with("STEP" + std::to_string(i + 1) + " "));
  CHECK(sys.config_work == expected_work(1, 1, 1, 1));
}

TEST_CASE("every local routes to all hosts of a full-size system") {
  const System sys = setup(small(8, 2, 8));
  REQUIRE(sys.topo.hosts.size() == 128);
  for (NodeId l : sys.local_list) {
    const ControllerNode& n = sys.node(l);
    for (NodeId h : sys.topo.hosts) CHECK(n.table.next_hop(h).has_value());
    CHECK(n.devices.records().size() == 2 + 16);
  }
  for (NodeId id : sys.controller_list) {
    if (sys.topo.hierarchy.role(id) == NodeRole::Host) continue;
    CHECK(owned_by_live(sys, id) == (id != sys.root() && sys.topo.hierarchy.role(id) != NodeRole::Local));
  }
  CHECK(sys.config_work == expected_work(8, 2, 8, 1));
}

TEST_CASE("config_work matches the step count and grows with every dimension") {
  for (int l : {1, 2, 3, 5}) {
    for (int s : {1, 2, 3}) {
      for (int h : {1, 2, 4}) {
        for (int p : {1, 2}) {
          if (p > l) continue;
          SystemConfig c = small(l, s, h);
          c.partitions = p;
          const std::uint64_t w = setup(c).config_work;
          CHECK(w == expected_work(l, s, h, p));
          CHECK(setup(small(l + 1, s, h)).config_work > expected_work(l, s, h, 1));
          CHECK(setup(small(l, s, h + 1)).config_work > expected_work(l, s, h, 1));
        }
      }
    }
  }
}

TEST_CASE("a cut link leaves the system unestablished") {
  SystemConfig c = small(2, 1, 2);
  // Hosts 5 and 6 hang off switch 3 only.
  c.down_links = {{NodeId{3}, NodeId{5}}};
  CHECK(code_of([&] { setup(c); }) == ErrorCode::EstablishFailure);
  c.down_links = {{NodeId{5}, NodeId{6}}};
  CHECK(code_of([&] { setup(c); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("a budget run serves exactly its budget") {
  System sys = setup(small(2, 2, 4));
  Simulation sim(sys, 3);
  CHECK(sim.run_requests(500, SimTime{1'000'000}));
  CHECK(sim.stats().requests_issued == 500);
  CHECK(sim.stats().requests_served == 500);
  CHECK(sim.stats().requests_lost == 0);
  CHECK(sim.in_flight() == 0);
  std::uint64_t per_host = 0;
  for (auto v : sim.stats().served_by_host | std::views::values) per_host += v;
  CHECK(per_host == 500);
  CHECK(sim.stats().packets_delivered == 500 * 8);
}

TEST_CASE("same seed, same run; another seed, another trace") {
  const SystemConfig base = small(2, 2, 4);
  const Cell cell{2, 2, 4, std::nullopt, 1500, 9};
  std::ostringstream t1;
  std::ostringstream t2;
  const MetricsRecord a = run_cell(ScenarioId::Sc3, cell, base, &t1);
  const MetricsRecord b = run_cell(ScenarioId::Sc3, cell, base, &t2);
  CHECK(a.trace_digest == b.trace_digest);
  CHECK(a.requests_served == b.requests_served);
  CHECK(a.config_work == b.config_work);
  CHECK(t1.str() == t2.str());
  CHECK_FALSE(t1.str().empty());

  Cell other = cell;
  other.seed = 10;
  CHECK(run_cell(ScenarioId::Sc3, other, base).trace_digest != a.trace_digest);
}

TEST_CASE("service order within a tick does not change the outcome") {
  for (std::uint64_t seed : {1, 2, 3}) {
    System s1 = setup(small(3, 2, 3));
    System s2 = setup(small(3, 2, 3));
    Simulation forward(s1, seed);
    Simulation backward(s2, seed);
    backward.set_reverse_service_order(true);
    forward.run_until(SimTime{2000});
    backward.run_until(SimTime{2000});
    CHECK(forward.stats().requests_served == backward.stats().requests_served);
    CHECK(forward.stats().served_by_host == backward.stats().served_by_host);
    CHECK(forward.stats().packets_forwarded == backward.stats().packets_forwarded);
    CHECK(forward.stats().packets_delivered == backward.stats().packets_delivered);
  }
}

TEST_CASE("ring traffic through one switch is served evenly") {
  SystemConfig c = small(1, 1, 4);
  c.traffic.pattern = TrafficPattern::Ring;
  System sys = setup(c);
  Simulation sim(sys, 1);
  sim.run_until(SimTime{3000});
  const auto& by_host = sim.stats().served_by_host;
  REQUIRE(by_host.size() == 4);
  const auto [lo, hi] = std::ranges::minmax(by_host | std::views::values);
  CHECK(lo > 0);
  CHECK(hi - lo <= 1);
}

TEST_CASE("served requests grow linearly with simulated time") {
  const SystemConfig base = small(4, 2, 4);
  auto served = [&](std::uint64_t t) {
    return static_cast<double>(run_cell(ScenarioId::Sc3, {4, 2, 4, std::nullopt, t, 1}, base).requests_served);
  };
  const double r1 = served(2000);
  const double r2 = served(4000);
  const double r4 = served(8000);
  CHECK(r2 / r1 >= 1.9);
  CHECK(r2 / r1 <= 2.1);
  CHECK(r4 / r2 >= 1.9);
  CHECK(r4 / r2 <= 2.1);
}

TEST_CASE("the balanced product serves the most") {
  ScenarioSpec spec = ScenarioSpec::defaults(ScenarioId::Sc4);
  spec.sim_time = 3000;
  const auto records = run_scenario(spec, SystemConfig{}, 3);
  REQUIRE(records.size() == 3);
  CHECK(records[0].n_local == 4);
  CHECK(records[1].n_local == 8);
  CHECK(records[2].n_local == 16);
  CHECK(records[1].requests_served >= records[0].requests_served);
  CHECK(records[1].requests_served >= records[2].requests_served);
  CHECK(records[1].config_work <= records[2].config_work);
}

TEST_CASE("parallel workers reproduce the serial records") {
  ScenarioSpec spec = ScenarioSpec::defaults(ScenarioId::Sc1);
  spec.values = {1, 2, 3};
  spec.requests = 200;
  spec.seeds = {1, 2};
  const SystemConfig base = small(1, 2, 2);
  const auto serial = run_scenario(spec, base, 1);
  const auto parallel = run_scenario(spec, base, 4);
  REQUIRE(serial.size() == 6);
  REQUIRE(parallel.size() == 6);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].n_local == parallel[i].n_local);
    CHECK(serial[i].seed == parallel[i].seed);
    CHECK(serial[i].trace_digest == parallel[i].trace_digest);
    CHECK(serial[i].requests_served == 200);
    CHECK(serial[i].requests_lost == 0);
  }
  CHECK(serial[0].config_work == serial[1].config_work);
  CHECK(serial[2].config_work > serial[0].config_work);
  CHECK(serial[4].config_work > serial[2].config_work);
}

TEST_CASE("a failed local is detected and its children adopted") {
  SystemConfig c = small(4, 2, 4);
  c.failures = {{kLocal0, SimTime{1000}}};
  System sys = setup(c);
  Simulation sim(sys, 1);
  sim.run_until(SimTime{1000});
  const std::uint64_t served_before = sim.stats().requests_served;
  sim.run_until(SimTime{6000});

  REQUIRE(sim.stats().failovers.size() == 1);
  const FailoverRecord& r = sim.stats().failovers.front();
  REQUIRE(r.detected_at);
  CHECK(r.detected_at->ticks - r.failed_at.ticks <= c.resilience.heartbeat_period * c.resilience.max_missed);
  CHECK(sys.topo.hierarchy.role(r.adopter) == NodeRole::Local);
  CHECK_FALSE(r.escalated);
  CHECK(r.moved == std::vector<NodeId>{NodeId{5}, NodeId{6}});
  for (NodeId id : sys.controller_list) {
    if (id == sys.root() || sys.topo.hierarchy.role(id) == NodeRole::Local) continue;
    CHECK(owned_by_live(sys, id));
  }
  CHECK(sys.owner_of(kHost0) == r.adopter);
  CHECK(sim.stats().requests_served > served_before);
  CHECK(sim.stats().requests_lost <= r.in_flight_at_failure);
  CHECK(sim.stats().served_by_host.at(kHost0) > 0);
}

TEST_CASE("a flood is detected at the uplink and then dropped") {
  SystemConfig c = small(4, 2, 4);
  AttackSpec a;
  a.id = 1;
  a.kind = AttackKind::DosFlood;
  a.start = SimTime{100};
  a.stop = SimTime{1100};
  a.target = NodeId{40};
  a.rate = 2.0;
  a.sources = {kHost0};
  c.attacks = {a};
  System sys = setup(c);
  Simulation sim(sys, 1);
  sim.run_until(SimTime{1500});

  CHECK(sim.stats().attack_packets_sent == 2000);
  CHECK(sim.stats().attack_packets_delivered < 200);
  const auto findings = sim.findings();
  REQUIRE(findings.contains(kSwitch0));
  const auto& f = findings.at(kSwitch0);
  CHECK(std::ranges::any_of(f, [](const Finding& x) { return x.kind == FindingKind::DosFlood; }));
  CHECK(sim.stats().requests_lost == 0);
}

TEST_CASE("forgeries fail the tag check when flows are sealed") {
  SystemConfig c = small(2, 2, 4);
  c.security.authenticate = true;
  AttackSpec a;
  a.id = 1;
  a.kind = AttackKind::PacketForge;
  a.start = SimTime{50};
  a.stop = SimTime{550};
  a.target = NodeId{20};
  a.rate = 0.1;
  a.sources = {NodeId{9}};
  a.flow_id = 1;
  c.attacks = {a};
  System sys = setup(c);
  Simulation sim(sys, 1);
  sim.run_until(SimTime{1000});
  CHECK(sim.stats().forged_rejected == 50);
  CHECK(sim.stats().forged_accepted == 0);
  CHECK(sim.stats().sealed_rejected == 0);
  CHECK(sim.stats().sealed_accepted > 0);
  CHECK(sim.stats().requests_served > 0);
}

TEST_CASE("a tapped edge sees plaintext only without encryption") {
  auto tap = [](bool encrypt) {
    SystemConfig c = small(2, 2, 4);
    c.security.authenticate = encrypt;
    c.security.encrypt = encrypt;
    AttackSpec a;
    a.id = 1;
    a.kind = AttackKind::Eavesdrop;
    a.start = SimTime{0};
    a.stop = SimTime{800};
    a.edge = std::pair{NodeId{3}, NodeId{1}};
    c.attacks = {a};
    System sys = setup(c);
    Simulation sim(sys, 1);
    sim.run_until(SimTime{1000});
    const auto& st = sim.stats();
    std::size_t readable = 0;
    for (std::uint64_t d : st.tap_digests) readable += st.plaintext_digests.contains(d);
    return std::pair{st.tap_digests.size(), readable};
  };
  const auto [seen_clear, read_clear] = tap(false);
  CHECK(seen_clear > 0);
  CHECK(read_clear == seen_clear);
  const auto [seen_sealed, read_sealed] = tap(true);
  CHECK(seen_sealed > 0);
  CHECK(read_sealed == 0);
}

TEST_CASE("repeated privileged requests lock the subject") {
  SystemConfig c = small(2, 2, 4);
  AttackSpec a;
  a.id = 1;
  a.kind = AttackKind::UserPrivEsc;
  a.start = SimTime{10};
  a.stop = SimTime{410};
  a.target = kLocal0;
  a.rate = 0.05;
  a.sources = {NodeId{10}};
  a.action = "actuate";
  c.attacks = {a};
  System sys = setup(c);
  Simulation sim(sys, 1);
  sim.run_until(SimTime{600});
  // Denials keep counting until the window holding the D-th one closes.
  CHECK(sim.stats().denials >= c.security.detector.denials);
  CHECK(sim.stats().denials < 20);
  CHECK(sim.stats().dropped_security == 20 - sim.stats().denials);
  const auto findings = sim.findings();
  REQUIRE(findings.contains(kLocal0));
  CHECK(std::ranges::any_of(findings.at(kLocal0), [](const Finding& f) {
    return f.kind == FindingKind::UserPrivEsc && f.subject == "host-10";
  }));
}

TEST_CASE("plants settle under control and tampering is reported once") {
  SystemConfig c = small(2, 1, 2);
  c.plant = default_plant();
  c.plant->x0 = Vector::Constant(1, 4.0);
  {
    System sys = setup(c);
    Simulation sim(sys, 1);
    sim.run_until(SimTime{3001});
    for (NodeId h : sys.topo.hosts) CHECK(std::abs(sim.plant(h).state.x(0)) < 1e-6);
    CHECK(sim.stats().tamper_findings == 0);
  }
  AttackSpec sensor;
  sensor.id = 1;
  sensor.kind = AttackKind::SensorTamper;
  sensor.start = SimTime{1000};
  sensor.stop = SimTime{2000};
  sensor.target = NodeId{5};
  sensor.bias = 2.0;
  AttackSpec actuator = sensor;
  actuator.id = 2;
  actuator.kind = AttackKind::ActuatorTamper;
  actuator.target = NodeId{7};
  actuator.value = 3.0;
  c.attacks = {sensor, actuator};
  System sys = setup(c);
  Simulation sim(sys, 1);
  sim.run_until(SimTime{3001});
  CHECK(sim.stats().tamper_findings == 2);
  const auto findings = sim.findings();
  auto raised = [&](NodeId owner, FindingKind kind, NodeId target) {
    return findings.contains(owner) && std::ranges::any_of(findings.at(owner), [&](const Finding& f) {
             return f.kind == kind && f.target == target && f.at >= SimTime{1000} && f.at < SimTime{2000};
           });
  };
  CHECK(raised(NodeId{1}, FindingKind::SensorTamper, NodeId{5}));
  CHECK(raised(NodeId{2}, FindingKind::ActuatorTamper, NodeId{7}));
}

TEST_CASE("reports") {
  MetricsRecord r;
  r.scenario = ScenarioId::Sc2;
  r.n_local = 8;
  r.switches_per_local = 2;
  r.hosts_per_switch = 4;
  r.seed = 3;
  r.sim_time = 12565;
  r.requests_served = 10000;
  r.config_work = 26326;
  r.config_wall_ms = 1.23456;
  r.test_wall_ms = 1000.0;
  const std::vector<MetricsRecord> one{r};

  std::ostringstream csv;
  emit_report(one, ReportFormat::Csv, csv);
  CHECK(csv.str() == std::string(kCsvHeader) + "\nSc2,8,2,4,3,12565,10000,26326,1.235,1000.000\n");
  std::ostringstream again;
  emit_report(one, ReportFormat::Csv, again);
  CHECK(again.str() == csv.str());

  std::istringstream in(csv.str());
  const auto back = read_report(in, ReportFormat::Csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].config_work == 26326);
  CHECK(back[0].config_wall_ms == doctest::Approx(1.235));

  const std::vector<MetricsRecord> two{r, r};
  std::ostringstream jl;
  emit_report(two, ReportFormat::Jsonl, jl);
  CHECK(std::ranges::count(jl.str(), '\n') == 2);
  std::istringstream jin(jl.str());
  const auto jback = read_report(jin, ReportFormat::Jsonl);
  REQUIRE(jback.size() == 2);
  CHECK(jback[1].scenario == ScenarioId::Sc2);
  CHECK(jback[1].sim_time == 12565);

  std::ostringstream none;
  CHECK(code_of([&] { emit_report({}, ReportFormat::Csv, none); }) == ErrorCode::EmptyReport);
  CHECK(code_of([] { report_format_from_string("xml"); }) == ErrorCode::BadValue);
  std::istringstream headless("Sc1,1,1,1,1,1,1,1,1,1\n");
  CHECK(code_of([&] { read_report(headless, ReportFormat::Csv); }) == ErrorCode::BadValue);
}
