#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "wctt/analysis.hpp"
#include "wctt/experiment.hpp"
#include "wctt/flow.hpp"
#include "wctt/simulator.hpp"

namespace wctt {

// ---------------------------------------------------------------------------
// Flow-set files
//
//   # comment
//   platform rows=8 cols=8 flit_bytes=16 link_delay_ps=500 router_delay_ps=1500 clock_period_ps=500
//   flow id=1 src=0,0 dst=5,0 size_bytes=48 priority=2 period_ps=1000000 jitter_ps=0
//
// One record per line, `key=value` fields in any order. The platform line is
// optional (missing keys take the reference values) but must precede every
// flow. jitter_ps defaults to 0. Deadlines equal periods.
// ---------------------------------------------------------------------------

/// Throws ParseError with the offending line and field.
FlowSet read_flowset(std::istream& in);
FlowSet load_flowset(const std::filesystem::path& file);
void write_flowset(std::ostream& out, const FlowSet& fs);

// ---------------------------------------------------------------------------
// Result tables. Every table is emitted both as CSV (header row, comma
// separated) and as a JSON array of objects with the same field names.
// ---------------------------------------------------------------------------

using Cell = std::variant<std::monostate, bool, std::int64_t, std::uint64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& out, const Table& t);
/// JSON array of row objects, serialised with two-space indentation.
std::string to_json(const Table& t);
/// JSON object whose members are the named tables.
std::string to_json(const std::vector<std::pair<std::string, const Table*>>& tables);

Table analysis_table(const FlowSet& fs, const AnalysisResult& r);
Table interference_table(const AnalysisResult& r);
Table trace_table(const SimTrace& t);
/// Observed best/avg/worst next to the analytic bounds, one row per flow.
Table sim_summary_table(const FlowSet& fs, const SimTrace& t, const AnalysisResult& r);
Table experiment_rows_table(const ExperimentResult& r);
Table experiment_stats_table(const ExperimentResult& r);
Table surface_table(const std::vector<SurfacePoint>& points);

// ---------------------------------------------------------------------------
// Experiment specs (JSON). Fields left out take default_spec(kind) values.
// ---------------------------------------------------------------------------

/// Throws ConfigError on unknown keys or invalid values.
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& file);
std::string experiment_spec_json(const ExperimentSpec& spec);

}  // namespace wctt
