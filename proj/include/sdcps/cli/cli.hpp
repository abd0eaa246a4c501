#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sdcps/scenario/scenario.hpp"

namespace sdcps {

enum class Verb { Run, Report, Validate, Replay };

enum class LogLevel { Off, Info, Trace };

LogLevel log_level_from_string(std::string_view s);  // throws BadValue

struct CliCommand {
  Verb verb = Verb::Run;
  std::filesystem::path config_path;
  std::optional<ScenarioId> scenario;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;  // from --seeds N..M
  std::optional<std::filesystem::path> out;
  ReportFormat format = ReportFormat::Csv;
  std::optional<std::filesystem::path> trace;  // recording written by run, read by replay
  std::optional<std::filesystem::path> in;
  unsigned jobs = 0;  // 0: one per hardware thread
  LogLevel log = LogLevel::Off;
  std::optional<std::string> help;  // set when -h was given
};

/// `args` excludes the program name. Throws UnknownVerb, MissingFlag or
/// BadValue.
CliCommand parse_cli(const std::vector<std::string>& args);

/// Runs a parsed command. Domain failures throw; a replay mismatch returns 1.
int execute(const CliCommand& cmd, std::ostream& out, std::ostream& err);

/// Parse + execute with the exit code convention: 0 ok, 1 domain error,
/// 2 usage error. Reads SDCPS_LOG from `log_env`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const char* log_env = nullptr);

}  // namespace sdcps
