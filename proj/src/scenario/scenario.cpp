#include "sdcps/scenario/scenario.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sdcps/core/error.hpp"
#include "sdcps/scenario/simulation.hpp"
#include "sdcps/scenario/system.hpp"

namespace sdcps {

std::vector<Cell> scenario_cells(const ScenarioSpec& spec, const SystemConfig& base) {
  validate_scenario(spec);
  std::vector<Cell> cells;
  auto add = [&](int l, int h, std::optional<std::uint64_t> requests, std::uint64_t t) {
    for (std::uint64_t seed : spec.seeds) cells.push_back({l, base.switches_per_local, h, requests, t, seed});
  };
  switch (spec.id) {
    case ScenarioId::Sc1:
      for (int v : spec.values) add(v, base.hosts_per_switch, spec.requests, spec.time_limit);
      break;
    case ScenarioId::Sc2:
      for (int v : spec.values) add(base.n_local, v, spec.requests, spec.time_limit);
      break;
    case ScenarioId::Sc3:
      for (std::uint64_t t : spec.sim_times) add(base.n_local, base.hosts_per_switch, std::nullopt, t);
      break;
    case ScenarioId::Sc4:
      for (const auto& [l, h] : spec.pairs) add(l, h, std::nullopt, spec.sim_time);
      break;
  }
  return cells;
}

MetricsRecord run_cell(ScenarioId id, const Cell& cell, const SystemConfig& base, std::ostream* trace) {
  SystemConfig cfg = base;
  cfg.n_local = cell.n_local;
  cfg.switches_per_local = cell.switches_per_local;
  cfg.hosts_per_switch = cell.hosts_per_switch;
  cfg.partitions = std::min(cfg.partitions, cfg.n_local);
  cfg.seed = cell.seed;

  System sys = setup(cfg);
  Simulation sim(sys, cell.seed, trace);
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t sim_time = cell.sim_time;
  if (cell.requests) {
    sim.run_requests(*cell.requests, SimTime{cell.sim_time});
    sim_time = sim.now().ticks + 1;
  } else {
    sim.run_until(SimTime{cell.sim_time});
  }
  const double test_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  MetricsRecord r;
  r.scenario = id;
  r.n_local = cfg.n_local;
  r.switches_per_local = cfg.switches_per_local;
  r.hosts_per_switch = cfg.hosts_per_switch;
  r.seed = cell.seed;
  r.sim_time = sim_time;
  r.requests_served = sim.stats().requests_served;
  r.config_work = sys.config_work;
  r.config_wall_ms = sys.config_wall_ms;
  r.test_wall_ms = test_ms;
  r.requests_issued = sim.stats().requests_issued;
  r.requests_lost = sim.stats().requests_lost;
  r.trace_digest = sim.trace_digest();
  r.trace_lines = sim.trace_lines();
  return r;
}

std::vector<MetricsRecord> run_scenario(const ScenarioSpec& spec, const SystemConfig& base, unsigned workers) {
  const std::vector<Cell> cells = scenario_cells(spec, base);
  std::vector<MetricsRecord> out(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        out[i] = run_cell(spec.id, cells[i], base);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cells.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "jsonl") return ReportFormat::Jsonl;
  throw Error(ErrorCode::BadValue, "unknown format " + std::string(s));
}

namespace {

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

void emit_report(std::span<const MetricsRecord> records, ReportFormat format, std::ostream& out) {
  if (records.empty()) throw Error(ErrorCode::EmptyReport, "no records to report");
  if (format == ReportFormat::Csv) {
    out << kCsvHeader << '\n';
    for (const MetricsRecord& r : records) {
      out << to_string(r.scenario) << ',' << r.n_local << ',' << r.switches_per_local << ',' << r.hosts_per_switch
          << ',' << r.seed << ',' << r.sim_time << ',' << r.requests_served << ',' << r.config_work << ','
          << fixed3(r.config_wall_ms) << ',' << fixed3(r.test_wall_ms) << '\n';
    }
    return;
  }
  for (const MetricsRecord& r : records) {
    nlohmann::ordered_json j;
    j["scenario"] = to_string(r.scenario);
    j["n_local"] = r.n_local;
    j["switches_per_local"] = r.switches_per_local;
    j["hosts_per_switch"] = r.hosts_per_switch;
    j["seed"] = r.seed;
    j["sim_time"] = r.sim_time;
    j["requests_served"] = r.requests_served;
    j["config_work"] = r.config_work;
    j["config_wall_ms"] = std::stod(fixed3(r.config_wall_ms));
    j["test_wall_ms"] = std::stod(fixed3(r.test_wall_ms));
    out << j.dump() << '\n';
  }
}

std::vector<MetricsRecord> read_report(std::istream& in, ReportFormat format) {
  std::vector<MetricsRecord> out;
  std::string line;
  auto bad = [](const std::string& why) { return Error(ErrorCode::BadValue, "report: " + why); };
  if (format == ReportFormat::Csv) {
    if (!std::getline(in, line) || line != kCsvHeader) throw bad("missing CSV header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() != 10) throw bad("expected 10 columns: " + line);
      MetricsRecord r;
      try {
        r.scenario = scenario_id_from_string(f[0]);
        r.n_local = std::stoi(f[1]);
        r.switches_per_local = std::stoi(f[2]);
        r.hosts_per_switch = std::stoi(f[3]);
        r.seed = std::stoull(f[4]);
        r.sim_time = std::stoull(f[5]);
        r.requests_served = std::stoull(f[6]);
        r.config_work = std::stoull(f[7]);
        r.config_wall_ms = std::stod(f[8]);
        r.test_wall_ms = std::stod(f[9]);
      } catch (const std::logic_error&) {
        throw bad("unparsable row: " + line);
      }
      out.push_back(r);
    }
    return out;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MetricsRecord r;
      r.scenario = scenario_id_from_string(j.at("scenario").get<std::string>());
      r.n_local = j.at("n_local").get<int>();
      r.switches_per_local = j.at("switches_per_local").get<int>();
      r.hosts_per_switch = j.at("hosts_per_switch").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.sim_time = j.at("sim_time").get<std::uint64_t>();
      r.requests_served = j.at("requests_served").get<std::uint64_t>();
      r.config_work = j.at("config_work").get<std::uint64_t>();
      r.config_wall_ms = j.at("config_wall_ms").get<double>();
      r.test_wall_ms = j.at("test_wall_ms").get<double>();
      out.push_back(r);
    } catch (const nlohmann::json::exception&) {
      throw bad("unparsable line: " + line);
    }
  }
  return out;
}

}  // namespace sdcps
