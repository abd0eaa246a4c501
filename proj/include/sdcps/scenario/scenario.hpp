#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdcps/scenario/config.hpp"

namespace sdcps {

struct MetricsRecord {
  ScenarioId scenario = ScenarioId::Sc1;
  int n_local = 0;
  int switches_per_local = 0;
  int hosts_per_switch = 0;
  std::uint64_t seed = 0;
  std::uint64_t sim_time = 0;  // ticks simulated
  std::uint64_t requests_served = 0;
  std::uint64_t config_work = 0;
  double config_wall_ms = 0.0;
  double test_wall_ms = 0.0;

  std::uint64_t requests_issued = 0;
  std::uint64_t requests_lost = 0;
  std::uint64_t trace_digest = 0;
  std::uint64_t trace_lines = 0;
};

/// One simulation cell: the base config with the cell's topology, run for a
/// request budget or a fixed simulated time.
struct Cell {
  int n_local = 0;
  int switches_per_local = 0;
  int hosts_per_switch = 0;
  std::optional<std::uint64_t> requests;
  std::uint64_t sim_time = 0;  // the limit when `requests` is set
  std::uint64_t seed = 0;
};

/// Cells in report order: swept value, then seed.
std::vector<Cell> scenario_cells(const ScenarioSpec& spec, const SystemConfig& base);

/// setup + simulation for one cell. Trace lines go to `trace` when given.
MetricsRecord run_cell(ScenarioId id, const Cell& cell, const SystemConfig& base, std::ostream* trace = nullptr);

/// Every cell of `spec`, `workers` at a time; records keep cell order.
std::vector<MetricsRecord> run_scenario(const ScenarioSpec& spec, const SystemConfig& base, unsigned workers = 1);

enum class ReportFormat { Csv, Jsonl };

ReportFormat report_format_from_string(std::string_view s);  // throws BadValue

inline constexpr std::string_view kCsvHeader =
    "scenario,n_local,switches_per_local,hosts_per_switch,seed,sim_time,requests_served,config_work,config_wall_ms,"
    "test_wall_ms";

/// Stable column order, one row per record. Throws EmptyReport.
void emit_report(std::span<const MetricsRecord> records, ReportFormat format, std::ostream& out);

/// Parses what emit_report wrote.
std::vector<MetricsRecord> read_report(std::istream& in, ReportFormat format);

}  // namespace sdcps
