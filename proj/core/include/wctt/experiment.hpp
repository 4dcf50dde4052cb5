#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wctt/analysis.hpp"
#include "wctt/flow.hpp"
#include "wctt/platform.hpp"
#include "wctt/simulator.hpp"
#include "wctt/units.hpp"

namespace wctt {

enum class ExperimentKind {
  flow_size_sweep,
  path_length_sweep,
  joint_sweep,
  flowset_size_sweep,
  priority_profile,
  tightness,
  two_flow_surface,
};

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

struct Range {
  std::uint64_t min = 0;
  std::uint64_t max = 0;

  friend bool operator==(const Range&, const Range&) = default;
};

/// One x-axis bucket of an experiment.
struct CategorySpec {
  std::string label;
  Range size_bytes{1, 1024};
  std::optional<Range> path_links;  // |L| including the two local links
  std::size_t flows = 50;

  friend bool operator==(const CategorySpec&, const CategorySpec&) = default;
};

struct PeriodSpec {
  // Uniform draw in [min, max] when `grid` is empty.
  Picoseconds min = ms(1);
  Picoseconds max = ms(10);
  // Otherwise each period is quantum * (one entry of grid, drawn uniformly),
  // which keeps hyper-periods short enough to simulate.
  std::vector<std::uint32_t> grid;
  Picoseconds quantum{0};

  friend bool operator==(const PeriodSpec&, const PeriodSpec&) = default;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::flow_size_sweep;
  std::vector<CategorySpec> categories;
  std::size_t sets_per_category = 20;
  std::uint64_t seed = 1;
  PlatformConfig platform;
  PeriodSpec periods;
  JitterPolicy jitter = JitterPolicy::shi_burns;

  // priority_profile: ranks per x-axis bucket (1 = every rank on its own).
  std::size_t rank_bucket = 1;

  // tightness: simulator settings.
  std::uint32_t vc_depth = 4;
  std::uint64_t hyper_periods = 2;
  ReleaseKind release = ReleaseKind::synchronous;

  // two_flow_surface
  Range surface_lengths{3, 16};
  std::vector<std::uint64_t> surface_sizes;
  std::vector<std::size_t> surface_cd_lengths{1, 5, 10};

  std::size_t threads = 0;  // 0: hardware concurrency

  /// Throws ConfigError.
  void validate() const;
};

/// Default categories and settings for each kind, at desk scale
/// (20 sets x 50 flows where the kind does not fix the set size).
ExperimentSpec default_spec(ExperimentKind kind);

/// Scales `spec` to 100 sets x 200 flows per category.
ExperimentSpec full_scale(ExperimentSpec spec);

/// Draws one flow-set for `category`. Periods are multiplied by 1.1 until
/// the classic analysis accepts the set. Deterministic per seed.
FlowSet generate_flowset(const ExperimentSpec& spec, std::size_t category, std::uint64_t seed);

/// Seed of set `set` in category `category`.
std::uint64_t set_seed(std::uint64_t base, std::size_t category, std::size_t set);

struct FlowRow {
  std::size_t category = 0;
  std::size_t set = 0;
  FlowId flow = 0;
  std::size_t priority_rank = 0;
  std::size_t path_links = 0;
  std::uint64_t size = 0;
  Picoseconds period{0};
  Picoseconds C{0};
  FixedPoint classic;
  FixedPoint tight;
  bool schedulable_classic = false;
  bool schedulable_tight = false;
  std::optional<Picoseconds> improvement_abs;
  std::optional<double> improvement_rel;
  std::optional<FlowSummary> observed;  // tightness only
};

struct CategoryStats {
  std::string label;
  std::size_t samples = 0;  // flows with both bounds converged
  double min = 0, p25 = 0, median = 0, p75 = 0, max = 0, mean = 0;
  std::vector<double> outliers;  // beyond 1.5 IQR from the quartiles
  std::size_t flows = 0;
  std::size_t diverged = 0;
  std::size_t schedulable_classic = 0;
  std::size_t schedulable_tight = 0;
};

struct ImprovementStats {
  std::vector<CategoryStats> categories;
};

struct SurfacePoint {
  std::size_t cd = 0;
  bool all_pre = true;
  std::size_t higher_links = 0;
  std::size_t lower_links = 0;
  std::uint64_t size = 0;
  PathDecomposition decomposition;
  Picoseconds R{0};
  Picoseconds R_tight{0};
  double improvement_rel = 0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<FlowRow> rows;
  ImprovementStats stats;
  std::vector<SurfacePoint> surface;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Percentile with linear interpolation between order statistics; `sorted` ascending, non-empty.
double percentile(const std::vector<double>& sorted, double q);
CategoryStats summarize(std::string label, std::vector<double> improvements);

/// Two flows, f_1 above f_2, contending on one contention domain.
struct TwoFlowScenario {
  PathDecomposition higher;  // of f_1's path relative to f_2
  std::size_t lower_links = 3;
  std::uint64_t higher_size = 48;
  std::uint64_t lower_size = 48;
  Picoseconds period = ns(1000);
  PlatformConfig platform;
};

struct TwoFlowOutcome {
  Picoseconds C_higher{0};
  Picoseconds C_lower{0};
  Picoseconds I{0};
  FixedPoint classic;
  FixedPoint tight;
  double improvement_rel = 0;
};

TwoFlowOutcome evaluate_two_flow(const TwoFlowScenario& s);

enum class SurfaceSplit { all_pre, all_post };

/// Relative improvement of f_2 over the (|L_1|, size) grid. Both flows have
/// the same size; f_2's path length equals |L_1| unless `lower_links` is set.
std::vector<SurfacePoint> two_flow_surface(Range higher_links, const std::vector<std::uint64_t>& sizes,
                                           std::size_t cd, SurfaceSplit split, const PlatformConfig& platform,
                                           std::optional<std::size_t> lower_links = std::nullopt,
                                           Picoseconds period = ms(1));

}  // namespace wctt
