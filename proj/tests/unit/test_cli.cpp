#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sdcps/cli/cli.hpp"
#include "sdcps/core/error.hpp"

using namespace sdcps;
namespace fs = std::filesystem;

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

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("sdcps_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return file(name);
  }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(const std::vector<std::string>& args, const char* log = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err, log);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::ranges::count(s, '\n')); }

constexpr const char* kSmall = R"({
  "topology": {"n_local": 2, "switches_per_local": 1, "hosts_per_switch": 3},
  "scenarios": {
    "Sc1": {"values": [2, 4], "requests": 120},
    "Sc3": {"sim_times": [300, 600]}
  }
})";

}  // namespace

TEST_CASE("parse run") {
  const CliCommand c = parse_cli({"run", "--config", "c", "--scenario", "Sc3", "--seed", "7"});
  CHECK(c.verb == Verb::Run);
  CHECK(c.config_path == "c");
  CHECK(c.scenario == ScenarioId::Sc3);
  CHECK(c.seed == 7u);
  CHECK(c.format == ReportFormat::Csv);
  CHECK_FALSE(c.out);

  const CliCommand r = parse_cli({"run", "--config", "c", "--scenario", "Sc1", "--seeds", "3..6", "--format", "jsonl"});
  CHECK(r.seeds == std::vector<std::uint64_t>{3, 4, 5, 6});
  CHECK_FALSE(r.seed);
  CHECK(r.format == ReportFormat::Jsonl);
}

TEST_CASE("usage errors") {
  CHECK(code_of([] { parse_cli({}); }) == ErrorCode::UnknownVerb);
  CHECK(code_of([] { parse_cli({"simulate"}); }) == ErrorCode::UnknownVerb);
  CHECK(code_of([] { parse_cli({"run", "--scenario", "Sc1"}); }) == ErrorCode::MissingFlag);
  CHECK(code_of([] { parse_cli({"run", "--config", "c"}); }) == ErrorCode::MissingFlag);
  CHECK(code_of([] { parse_cli({"validate"}); }) == ErrorCode::MissingFlag);
  CHECK(code_of([] { parse_cli({"replay"}); }) == ErrorCode::MissingFlag);
  CHECK(code_of([] { parse_cli({"report"}); }) == ErrorCode::MissingFlag);
  CHECK(code_of([] { parse_cli({"run", "--config", "c", "--scenario", "Sc7"}); }) == ErrorCode::BadValue);
  CHECK(code_of([] { parse_cli({"run", "--config", "c", "--scenario", "Sc1", "--seed", "x"}); }) ==
        ErrorCode::BadValue);
  CHECK(code_of([] { parse_cli({"run", "--config", "c", "--scenario", "Sc1", "--seeds", "4..2"}); }) ==
        ErrorCode::BadValue);
  CHECK(code_of([] { parse_cli({"run", "--config", "c", "--scenario", "Sc1", "--seeds", "4"}); }) ==
        ErrorCode::BadValue);
  CHECK(code_of([] { parse_cli({"run", "--config", "c", "--scenario", "Sc1", "--seed", "1", "--seeds", "1..2"}); }) ==
        ErrorCode::BadValue);
  CHECK(code_of([] { parse_cli({"run", "--config", "c", "--scenario", "Sc1", "--format", "xml"}); }) ==
        ErrorCode::BadValue);
  CHECK(code_of([] { parse_cli({"validate", "--config", "c", "--verbose"}); }) == ErrorCode::BadValue);
  CHECK(code_of([] { log_level_from_string("debug"); }) == ErrorCode::BadValue);
  CHECK(log_level_from_string("") == LogLevel::Off);
  CHECK(log_level_from_string("trace") == LogLevel::Trace);
}

TEST_CASE("exit codes follow the outcome class") {
  TempDir dir;
  const std::string good = dir.write("good.json", kSmall);
  const std::string bad = dir.write("bad.json", R"({"topology": {"n_local": 2, "partitions": 3}})");

  CHECK(cli({"validate", "--config", good}).code == 0);
  CHECK(cli({"validate", "--config", bad}).code == 1);
  CHECK(cli({"validate", "--config", dir.file("missing.json")}).code == 1);
  CHECK(cli({"validate"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"validate", "--config", good}, "verbose").code == 2);
  CHECK(cli({"report", "--in", dir.file("missing.csv")}).code == 1);
  CHECK(cli({"replay", "--trace", good}).code == 1);

  const Outcome help = cli({"run", "--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("--scenario") != std::string::npos);
}

TEST_CASE("run writes one row per cell and nothing else") {
  TempDir dir;
  const std::string cfg = dir.write("c.json", kSmall);
  const Outcome o = cli({"run", "--config", cfg, "--scenario", "Sc1", "--seed", "3", "--out", dir.file("r.csv")});
  REQUIRE(o.code == 0);
  CHECK(o.out.empty());
  const std::string csv = slurp(dir.file("r.csv"));
  CHECK(lines(csv) == 3);
  std::istringstream in(csv);
  const auto records = read_report(in, ReportFormat::Csv);
  REQUIRE(records.size() == 2);
  CHECK(records[0].n_local == 2);
  CHECK(records[1].n_local == 4);
  for (const auto& r : records) CHECK(r.requests_served == 120);

  std::set<std::string> files;
  for (const auto& e : fs::directory_iterator(dir.path)) files.insert(e.path().filename().string());
  CHECK(files == std::set<std::string>{"c.json", "r.csv"});
}

TEST_CASE("seed ranges multiply the cells, ordered by value then seed") {
  TempDir dir;
  const std::string cfg = dir.write("c.json", kSmall);
  const Outcome o = cli({"run", "--config", cfg, "--scenario", "Sc3", "--seeds", "1..3", "--jobs", "3"});
  REQUIRE(o.code == 0);
  std::istringstream in(o.out);
  const auto records = read_report(in, ReportFormat::Csv);
  REQUIRE(records.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(records[i].sim_time == (i < 3 ? 300u : 600u));
    CHECK(records[i].seed == i % 3 + 1);
  }
}

TEST_CASE("recordings replay to the same digest and differ under another seed") {
  TempDir dir;
  const std::string cfg = dir.write("c.json", kSmall);
  const std::vector<std::string> run{"run", "--config", cfg, "--scenario", "Sc3", "--seed", "7"};
  auto with_trace = [&](const std::string& name) {
    auto args = run;
    args.insert(args.end(), {"--trace", dir.file(name)});
    return cli(args).code;
  };
  REQUIRE(with_trace("a.jsonl") == 0);
  REQUIRE(with_trace("b.jsonl") == 0);
  CHECK(slurp(dir.file("a.jsonl")) == slurp(dir.file("b.jsonl")));
  CHECK(lines(slurp(dir.file("a.jsonl"))) == 2);

  const Outcome same = cli({"replay", "--trace", dir.file("a.jsonl")});
  CHECK(same.code == 0);
  CHECK(lines(same.out) == 2);
  CHECK(same.out.find("MISMATCH") == std::string::npos);

  const Outcome other = cli({"replay", "--trace", dir.file("a.jsonl"), "--seed", "8"});
  CHECK(other.code == 1);
  CHECK(other.out.find("MISMATCH") != std::string::npos);

  // A different configuration is a different run.
  const std::string alt = dir.write("alt.json", R"({"topology": {"n_local": 2, "switches_per_local": 1,
    "hosts_per_switch": 3}, "capacity": {"switch": 2}})");
  CHECK(cli({"replay", "--trace", dir.file("a.jsonl"), "--config", alt}).code == 1);

  dir.write("empty.jsonl", "");
  CHECK(cli({"replay", "--trace", dir.file("empty.jsonl")}).code == 1);
}

TEST_CASE("report converts between formats losslessly") {
  TempDir dir;
  const std::string cfg = dir.write("c.json", kSmall);
  REQUIRE(cli({"run", "--config", cfg, "--scenario", "Sc3", "--out", dir.file("r.csv")}).code == 0);
  REQUIRE(cli({"report", "--in", dir.file("r.csv"), "--format", "jsonl", "--out", dir.file("r.jsonl")}).code == 0);
  CHECK(lines(slurp(dir.file("r.jsonl"))) == 2);
  const Outcome back = cli({"report", "--in", dir.file("r.jsonl")});
  CHECK(back.code == 0);
  CHECK(back.out == slurp(dir.file("r.csv")));
}

TEST_CASE("log levels") {
  TempDir dir;
  const std::string cfg = dir.write("c.json", kSmall);
  const std::vector<std::string> args{"run", "--config", cfg, "--scenario", "Sc3"};
  CHECK(cli(args).err.empty());
  const Outcome info = cli(args, "info");
  CHECK(lines(info.err) == 2);
  CHECK(info.err.starts_with("[info] Sc3"));
  const Outcome trace = cli(args, "trace");
  CHECK(lines(trace.err) > 100);
  CHECK(lines(trace.out) == 3);
}
