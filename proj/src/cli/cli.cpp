#include "sdcps/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdcps/core/error.hpp"

namespace sdcps {

LogLevel log_level_from_string(std::string_view s) {
  if (s.empty() || s == "off") return LogLevel::Off;
  if (s == "info") return LogLevel::Info;
  if (s == "trace") return LogLevel::Trace;
  throw Error(ErrorCode::BadValue, "SDCPS_LOG must be off, info or trace, not " + std::string(s));
}

namespace {

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  auto number = [&](std::string_view part) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || end != part.data() + part.size()) {
      throw Error(ErrorCode::BadValue, "--seeds expects N..M, got " + text);
    }
    return v;
  };
  if (dots == std::string::npos) throw Error(ErrorCode::BadValue, "--seeds expects N..M, got " + text);
  const std::uint64_t lo = number(std::string_view(text).substr(0, dots));
  const std::uint64_t hi = number(std::string_view(text).substr(dots + 2));
  if (hi < lo) throw Error(ErrorCode::BadValue, "--seeds range is empty: " + text);
  if (hi - lo >= 100000) throw Error(ErrorCode::BadValue, "--seeds range too large: " + text);
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::BadValue, "cannot write " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::BadValue, "cannot read " + path.string());
  return f;
}

nlohmann::ordered_json recording(ScenarioId id, const Cell& cell, const SystemConfig& base, const MetricsRecord& r) {
  nlohmann::ordered_json j;
  j["scenario"] = to_string(id);
  j["cell"] = {{"n_local", cell.n_local},
               {"switches_per_local", cell.switches_per_local},
               {"hosts_per_switch", cell.hosts_per_switch},
               {"requests", cell.requests ? nlohmann::ordered_json(*cell.requests) : nlohmann::ordered_json()},
               {"sim_time", cell.sim_time},
               {"seed", cell.seed}};
  j["config"] = nlohmann::ordered_json::parse(config_to_json(base));
  j["trace_digest"] = hex(r.trace_digest);
  j["trace_lines"] = r.trace_lines;
  j["requests_issued"] = r.requests_issued;
  j["requests_served"] = r.requests_served;
  j["requests_lost"] = r.requests_lost;
  j["config_work"] = r.config_work;
  return j;
}

int run(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
  const SystemConfig base = load_config(cmd.config_path);
  ScenarioSpec spec = base.scenario(*cmd.scenario);
  if (cmd.seed) spec.seeds = {*cmd.seed};
  if (!cmd.seeds.empty()) spec.seeds = cmd.seeds;
  const std::vector<Cell> cells = scenario_cells(spec, base);

  std::vector<MetricsRecord> records;
  if (cmd.log == LogLevel::Trace) {
    for (const Cell& c : cells) records.push_back(run_cell(spec.id, c, base, &err));
  } else {
    const unsigned jobs = cmd.jobs != 0 ? cmd.jobs : std::max(1u, std::thread::hardware_concurrency());
    records = run_scenario(spec, base, jobs);
  }
  if (cmd.log != LogLevel::Off) {
    for (const MetricsRecord& r : records) {
      err << "[info] " << to_string(r.scenario) << " n_local=" << r.n_local << " hosts_per_switch="
          << r.hosts_per_switch << " seed=" << r.seed << " sim_time=" << r.sim_time
          << " served=" << r.requests_served << " lost=" << r.requests_lost << " config_work=" << r.config_work
          << " digest=" << hex(r.trace_digest) << '\n';
    }
  }

  if (cmd.out) {
    std::ofstream f = open_out(*cmd.out);
    emit_report(records, cmd.format, f);
  } else {
    emit_report(records, cmd.format, out);
  }
  if (cmd.trace) {
    std::ofstream f = open_out(*cmd.trace);
    for (std::size_t i = 0; i < cells.size(); ++i) f << recording(spec.id, cells[i], base, records[i]).dump() << '\n';
  }
  return 0;
}

int report(const CliCommand& cmd, std::ostream& out) {
  std::ifstream in = open_in(*cmd.in);
  std::string first;
  std::getline(in, first);
  const ReportFormat from = first == kCsvHeader ? ReportFormat::Csv : ReportFormat::Jsonl;
  in.clear();
  in.seekg(0);
  const std::vector<MetricsRecord> records = read_report(in, from);
  if (cmd.out) {
    std::ofstream f = open_out(*cmd.out);
    emit_report(records, cmd.format, f);
  } else {
    emit_report(records, cmd.format, out);
  }
  return 0;
}

int validate(const CliCommand& cmd, std::ostream& out) {
  const SystemConfig c = load_config(cmd.config_path);
  for (ScenarioId id : {ScenarioId::Sc1, ScenarioId::Sc2, ScenarioId::Sc3, ScenarioId::Sc4}) {
    validate_scenario(c.scenario(id));
  }
  out << "ok: " << c.n_local << " locals, " << c.switches_per_local << " switches per local, "
      << c.hosts_per_switch << " hosts per switch, " << c.vertex_count() << " vertices\n";
  return 0;
}

int replay(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
  std::ifstream in = open_in(*cmd.trace);
  std::optional<SystemConfig> override_config;
  if (!cmd.config_path.empty()) override_config = load_config(cmd.config_path);
  std::size_t n = 0;
  std::size_t mismatched = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    ScenarioId id;
    Cell cell;
    SystemConfig base;
    std::uint64_t recorded = 0;
    try {
      const auto j = nlohmann::json::parse(line);
      id = scenario_id_from_string(j.at("scenario").get<std::string>());
      const auto& c = j.at("cell");
      cell.n_local = c.at("n_local").get<int>();
      cell.switches_per_local = c.at("switches_per_local").get<int>();
      cell.hosts_per_switch = c.at("hosts_per_switch").get<int>();
      if (!c.at("requests").is_null()) cell.requests = c.at("requests").get<std::uint64_t>();
      cell.sim_time = c.at("sim_time").get<std::uint64_t>();
      cell.seed = c.at("seed").get<std::uint64_t>();
      base = override_config ? *override_config : parse_config(j.at("config").dump());
      recorded = std::stoull(j.at("trace_digest").get<std::string>(), nullptr, 16);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BadValue, "unreadable recording line " + std::to_string(n + 1) + ": " + e.what());
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadValue, "unreadable digest on recording line " + std::to_string(n + 1));
    }
    if (cmd.seed) cell.seed = *cmd.seed;
    const MetricsRecord r = run_cell(id, cell, base, cmd.log == LogLevel::Trace ? &err : nullptr);
    const bool same = r.trace_digest == recorded;
    mismatched += same ? 0 : 1;
    out << (same ? "MATCH " : "MISMATCH ") << to_string(id) << " n_local=" << cell.n_local
        << " hosts_per_switch=" << cell.hosts_per_switch << " seed=" << cell.seed << " recorded=" << hex(recorded)
        << " replayed=" << hex(r.trace_digest) << '\n';
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::BadValue, "recording " + cmd.trace->string() + " is empty");
  return mismatched == 0 ? 0 : 1;
}

}  // namespace

CliCommand parse_cli(const std::vector<std::string>& args) {
  static const std::vector<std::pair<std::string, Verb>> verbs{
      {"run", Verb::Run}, {"report", Verb::Report}, {"validate", Verb::Validate}, {"replay", Verb::Replay}};
  if (args.empty()) throw Error(ErrorCode::UnknownVerb, "expected a verb: run, report, validate or replay");
  const auto v = std::ranges::find(verbs, args.front(), &std::pair<std::string, Verb>::first);
  if (v == verbs.end()) throw Error(ErrorCode::UnknownVerb, "unknown verb " + args.front());

  CliCommand cmd;
  cmd.verb = v->second;
  CLI::App app{"sdcps " + v->first};
  app.name("sdcps " + v->first);

  std::string config;
  std::string scenario;
  std::uint64_t seed = 0;
  std::string seeds;
  std::string out;
  std::string format = "csv";
  std::string trace;
  std::string in;
  unsigned jobs = 0;
  CLI::Option* seed_opt = nullptr;

  switch (cmd.verb) {
    case Verb::Run: {
      app.add_option("--config", config, "configuration file")->required();
      app.add_option("--scenario", scenario, "Sc1, Sc2, Sc3 or Sc4")->required();
      seed_opt = app.add_option("--seed", seed, "run a single seed");
      app.add_option("--seeds", seeds, "run seeds N..M inclusive")->excludes(seed_opt);
      app.add_option("--out", out, "report file (default stdout)");
      app.add_option("--format", format, "csv or jsonl");
      app.add_option("--trace", trace, "write a replayable recording here");
      app.add_option("--jobs", jobs, "worker threads (default: one per core)");
      break;
    }
    case Verb::Report:
      app.add_option("--in", in, "report to read (csv or jsonl)")->required();
      app.add_option("--out", out, "report file (default stdout)");
      app.add_option("--format", format, "csv or jsonl");
      break;
    case Verb::Validate:
      app.add_option("--config", config, "configuration file")->required();
      break;
    case Verb::Replay:
      app.add_option("--trace", trace, "recording written by run --trace")->required();
      seed_opt = app.add_option("--seed", seed, "replay under this seed instead");
      app.add_option("--config", config, "replay under this configuration instead");
      break;
  }

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);  // CLI11 takes them reversed
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    cmd.help = app.help();
    return cmd;
  } catch (const CLI::RequiredError& e) {
    throw Error(ErrorCode::MissingFlag, e.what());
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::BadValue, e.what());
  }

  cmd.config_path = config;
  if (!scenario.empty()) cmd.scenario = scenario_id_from_string(scenario);
  if (seed_opt != nullptr && seed_opt->count() > 0) cmd.seed = seed;
  if (!seeds.empty()) cmd.seeds = parse_seed_range(seeds);
  if (!out.empty()) cmd.out = out;
  cmd.format = report_format_from_string(format);
  if (!trace.empty()) cmd.trace = trace;
  if (!in.empty()) cmd.in = in;
  cmd.jobs = jobs;
  return cmd;
}

int execute(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.help) {
    out << *cmd.help;
    return 0;
  }
  switch (cmd.verb) {
    case Verb::Run: return run(cmd, out, err);
    case Verb::Report: return report(cmd, out);
    case Verb::Validate: return validate(cmd, out);
    case Verb::Replay: return replay(cmd, out, err);
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const char* log_env) {
  CliCommand cmd;
  try {
    cmd = parse_cli(args);
    cmd.log = log_level_from_string(log_env != nullptr ? log_env : "");
  } catch (const Error& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
  try {
    return execute(cmd, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sdcps
