#include "wctt/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "wctt/errors.hpp"

namespace wctt {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>> kKindNames = {
    {ExperimentKind::flow_size_sweep, "flow-size-sweep"},
    {ExperimentKind::path_length_sweep, "path-length-sweep"},
    {ExperimentKind::joint_sweep, "joint-sweep"},
    {ExperimentKind::flowset_size_sweep, "flowset-size-sweep"},
    {ExperimentKind::priority_profile, "priority-profile"},
    {ExperimentKind::tightness, "tightness"},
    {ExperimentKind::two_flow_surface, "two-flow-surface"},
};

std::string bytes_label(std::uint64_t b) {
  if (b >= 1024 && b % 1024 == 0) return std::to_string(b / 1024) + "kB";
  return std::to_string(b) + "B";
}

std::vector<CategorySpec> size_categories() {
  std::vector<CategorySpec> out;
  out.push_back({"1B-16B", {1, 16}, std::nullopt, 50});
  for (std::uint64_t lo = 16; lo < 256 * 1024; lo *= 4)
    out.push_back({bytes_label(lo) + "-" + bytes_label(lo * 4), {lo, lo * 4}, std::nullopt, 50});
  return out;
}

std::vector<CategorySpec> path_categories() {
  std::vector<CategorySpec> out;
  for (std::uint64_t hi = 4; hi <= 16; hi += 2)
    out.push_back({"3-" + std::to_string(hi), {1, 1024}, Range{3, hi}, 50});
  return out;
}

std::uint64_t max_path_links(const PlatformConfig& p) { return std::uint64_t{p.rows} + p.cols; }

bool path_range_feasible(const Range& r, const PlatformConfig& p) {
  return std::max<std::uint64_t>(r.min, 3) <= std::min(r.max, max_path_links(p));
}

Picoseconds scale_up(Picoseconds v) { return Picoseconds{(v.count() * 11 + 9) / 10}; }

Picoseconds round_up_to(Picoseconds v, Picoseconds q) { return ceil_div(v, q) * q; }

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

void ExperimentSpec::validate() const {
  platform.validate();
  if (sets_per_category < 1) throw ConfigError("sets_per_category must be at least 1");
  if (rank_bucket < 1) throw ConfigError("rank_bucket must be at least 1");
  if (kind == ExperimentKind::two_flow_surface) {
    if (surface_sizes.empty()) throw ConfigError("surface needs at least one flow size");
    if (surface_lengths.min < 1 || surface_lengths.min > surface_lengths.max)
      throw ConfigError("surface path-length range must be non-empty and start at 1 or more");
    if (surface_cd_lengths.empty()) throw ConfigError("surface needs at least one CD length");
    for (auto cd : surface_cd_lengths)
      if (cd < 1) throw ConfigError("CD length must be at least 1");
    for (auto s : surface_sizes)
      if (s < 1) throw ConfigError("surface flow sizes must be at least 1 byte");
    return;
  }
  if (categories.empty()) throw ConfigError("experiment has no categories");
  for (const auto& c : categories) {
    const auto where = "category '" + c.label + "': ";
    if (c.size_bytes.min < 1 || c.size_bytes.min > c.size_bytes.max)
      throw ConfigError(where + "size range must be non-empty and start at 1 byte or more");
    if (c.flows < 1) throw ConfigError(where + "needs at least one flow");
    if (c.flows > static_cast<std::size_t>(std::numeric_limits<std::int64_t>::max()))
      throw ConfigError(where + "too many flows");
    if (c.path_links) {
      if (c.path_links->min > c.path_links->max) throw ConfigError(where + "path range is empty");
      if (!path_range_feasible(*c.path_links, platform))
        throw ConfigError(where + "path length range unattainable on a " + std::to_string(platform.cols) + "x" +
                          std::to_string(platform.rows) + " mesh");
    }
  }
  if (platform.tile_count() < 2) throw ConfigError("flows need a mesh with at least two tiles");
  if (periods.grid.empty()) {
    if (periods.min.count() <= 0 || periods.min > periods.max)
      throw ConfigError("period range must be positive and ordered");
  } else {
    if (periods.quantum.count() <= 0) throw ConfigError("period grid needs a positive quantum");
    for (auto g : periods.grid)
      if (g < 1) throw ConfigError("period grid entries must be positive");
  }
}

ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  switch (kind) {
    case ExperimentKind::flow_size_sweep:
      s.categories = size_categories();
      break;
    case ExperimentKind::path_length_sweep:
      s.categories = path_categories();
      break;
    case ExperimentKind::joint_sweep:
      for (const auto& sz : size_categories())
        for (const auto& pl : path_categories())
          s.categories.push_back({sz.label + "/" + pl.label, sz.size_bytes, pl.path_links, 50});
      break;
    case ExperimentKind::flowset_size_sweep:
      for (std::size_t n = 100; n <= 500; n += 50) s.categories.push_back({std::to_string(n), {1, 1024}, {}, n});
      break;
    case ExperimentKind::priority_profile:
      s.categories.push_back({"all", {1, 1024}, std::nullopt, 50});
      s.rank_bucket = 10;
      break;
    case ExperimentKind::tightness:
      s.platform.rows = 6;
      s.platform.cols = 6;
      s.platform.clock_period = ns(10);  // 100 MHz
      s.platform.link_delay = ns(10);
      s.platform.router_delay = ns(30);
      // 2-48 payload flits of 16 B
      s.categories.push_back({"42 flows", {17, 768}, std::nullopt, 42});
      s.sets_per_category = 1;
      s.periods.quantum = us(500);
      s.periods.grid = {1, 2, 3, 6, 9, 18};  // 0.5 ms ... 9 ms, hyper-period 9 ms
      break;
    case ExperimentKind::two_flow_surface:
      s.surface_lengths = {3, 16};
      for (std::uint64_t b = 16; b <= 4096; b *= 2) s.surface_sizes.push_back(b);
      break;
  }
  return s;
}

ExperimentSpec full_scale(ExperimentSpec spec) {
  spec.sets_per_category = 100;
  if (spec.kind != ExperimentKind::flowset_size_sweep && spec.kind != ExperimentKind::tightness)
    for (auto& c : spec.categories) c.flows = 200;
  return spec;
}

std::uint64_t set_seed(std::uint64_t base, std::size_t category, std::size_t set) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(category), static_cast<std::uint32_t>(set)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (std::uint64_t{out[0]} << 32) | out[1];
}

FlowSet generate_flowset(const ExperimentSpec& spec, std::size_t category, std::uint64_t seed) {
  if (category >= spec.categories.size()) throw ConfigError("category index out of range");
  const auto& cat = spec.categories[category];
  const auto& p = spec.platform;
  if (p.tile_count() < 2) throw ConfigError("flows need a mesh with at least two tiles");
  if (cat.path_links && !path_range_feasible(*cat.path_links, p))
    throw ConfigError("category '" + cat.label + "': path length range unattainable on this mesh");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> col(0, p.cols - 1);
  std::uniform_int_distribution<std::uint32_t> row(0, p.rows - 1);
  std::uniform_int_distribution<std::uint64_t> size(cat.size_bytes.min, cat.size_bytes.max);

  std::vector<std::int64_t> priorities(cat.flows);
  std::iota(priorities.begin(), priorities.end(), std::int64_t{1});
  std::shuffle(priorities.begin(), priorities.end(), rng);

  auto period = [&]() -> Picoseconds {
    if (spec.periods.grid.empty()) {
      // Whole clock cycles, so every generated set can be simulated.
      const auto clock = p.clock_period.count();
      const auto lo = (spec.periods.min.count() + clock - 1) / clock;
      const auto hi = std::max(lo, spec.periods.max.count() / clock);
      return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng) * p.clock_period;
    }
    const auto k = std::uniform_int_distribution<std::size_t>(0, spec.periods.grid.size() - 1)(rng);
    return spec.periods.grid[k] * spec.periods.quantum;
  };

  std::vector<Flow> flows;
  flows.reserve(cat.flows);
  for (std::size_t i = 0; i < cat.flows; ++i) {
    TileCoord src, dst;
    for (;;) {
      src = {col(rng), row(rng)};
      dst = {col(rng), row(rng)};
      if (src == dst) continue;
      const std::uint64_t links = 2 + (src.x > dst.x ? src.x - dst.x : dst.x - src.x) +
                                  (src.y > dst.y ? src.y - dst.y : dst.y - src.y);
      if (!cat.path_links || (links >= cat.path_links->min && links <= cat.path_links->max)) break;
    }
    flows.push_back(make_flow(static_cast<FlowId>(i + 1), src, dst, size(rng), priorities[i], period()));
  }

  // Quantised periods stay on a common grid when rescaled, so the hyper-period
  // remains a small multiple of the quantum.
  Picoseconds quantum = spec.periods.quantum;
  std::vector<std::uint32_t> multiples;
  if (!spec.periods.grid.empty())
    for (const auto& f : flows) multiples.push_back(static_cast<std::uint32_t>(f.period / quantum));

  for (int round = 0;; ++round) {
    FlowSet fs(p, flows);
    if (classic_schedulable(fs, spec.jitter)) return fs;
    if (round == 400) throw ConfigError("flow-set stays unschedulable after rescaling its periods");
    if (multiples.empty()) {
      for (auto& f : flows) f.period = f.deadline = round_up_to(scale_up(f.period), p.clock_period);
    } else {
      quantum = round_up_to(scale_up(quantum), p.clock_period);
      for (std::size_t i = 0; i < flows.size(); ++i) flows[i].period = flows[i].deadline = multiples[i] * quantum;
    }
  }
}

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

CategoryStats summarize(std::string label, std::vector<double> v) {
  CategoryStats s;
  s.label = std::move(label);
  s.samples = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.p25 = percentile(v, 0.25);
  s.median = percentile(v, 0.5);
  s.p75 = percentile(v, 0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const double iqr = s.p75 - s.p25;
  for (double x : v)
    if (x < s.p25 - 1.5 * iqr || x > s.p75 + 1.5 * iqr) s.outliers.push_back(x);
  return s;
}

TwoFlowOutcome evaluate_two_flow(const TwoFlowScenario& s) {
  if (s.higher.cd < 1) throw ConfigError("two-flow scenario needs a contention domain");
  if (s.lower_links < s.higher.cd || s.lower_links < 2)
    throw ConfigError("lower-priority path shorter than the contention domain");
  const auto& p = s.platform;
  TwoFlowOutcome o;
  o.C_higher = basic_latency(s.higher.total(), s.higher_size, p);
  o.C_lower = basic_latency(s.lower_links, s.lower_size, p);
  o.I = o.C_higher - sigma_pre(s.higher, p) - sigma_post(s.higher, p);
  const Interferer classic{s.period, Picoseconds::zero(), o.C_higher};
  const Interferer tight{s.period, Picoseconds::zero(), o.I};
  o.classic = solve_fixed_point(o.C_lower, s.period, std::span(&classic, 1));
  o.tight = solve_fixed_point(o.C_lower, s.period, std::span(&tight, 1));
  if (o.classic.converged && o.tight.converged)
    o.improvement_rel = static_cast<double>((o.classic.value - o.tight.value).count()) /
                        static_cast<double>(o.classic.value.count());
  return o;
}

std::vector<SurfacePoint> two_flow_surface(Range higher_links, const std::vector<std::uint64_t>& sizes,
                                           std::size_t cd, SurfaceSplit split, const PlatformConfig& platform,
                                           std::optional<std::size_t> lower_links, Picoseconds period) {
  if (cd < 1) throw ConfigError("CD length must be at least 1");
  std::vector<SurfacePoint> out;
  for (auto len = std::max<std::uint64_t>(higher_links.min, cd); len <= higher_links.max; ++len) {
    const auto rest = static_cast<std::size_t>(len) - cd;
    const PathDecomposition d = split == SurfaceSplit::all_pre ? PathDecomposition{rest, cd, 0}
                                                               : PathDecomposition{0, cd, rest};
    // A path has at least the two local links.
    const auto lower = std::max<std::size_t>(lower_links.value_or(static_cast<std::size_t>(len)), std::max<std::size_t>(cd, 2));
    for (auto size : sizes) {
      TwoFlowScenario s{d, lower, size, size, period, platform};
      const auto o = evaluate_two_flow(s);
      out.push_back({cd, split == SurfaceSplit::all_pre, static_cast<std::size_t>(len), lower, size, d,
                     o.classic.value, o.tight.value, o.improvement_rel});
    }
  }
  return out;
}

namespace {

std::vector<FlowRow> run_set(const ExperimentSpec& spec, std::size_t cat, std::size_t set) {
  const auto fs = generate_flowset(spec, cat, set_seed(spec.seed, cat, set));
  const auto res = analyze_flowset(fs, AnalysisOptions{spec.jitter, JitterSource::mode_consistent});

  std::optional<SimTrace> trace;
  if (spec.kind == ExperimentKind::tightness) {
    SimConfig sc;
    sc.vc_depth = spec.vc_depth;
    sc.horizon = HyperPeriods{spec.hyper_periods};
    sc.release.kind = spec.release;
    sc.release.seed = set_seed(spec.seed ^ 0x5157ULL, cat, set);
    trace = simulate(fs, sc);
  }

  std::vector<FlowRow> rows;
  rows.reserve(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& a = res.flows[i];
    FlowRow r;
    r.category = cat;
    r.set = set;
    r.flow = a.id;
    r.priority_rank = a.priority_rank;
    r.path_links = fs.path(i).size();
    r.size = fs.flow(i).size;
    r.period = fs.flow(i).period;
    r.C = a.C;
    r.classic = a.classic;
    r.tight = a.tight;
    r.schedulable_classic = a.schedulable_classic;
    r.schedulable_tight = a.schedulable_tight;
    r.improvement_abs = a.improvement_abs;
    r.improvement_rel = a.improvement_rel;
    if (trace) r.observed = trace->flows[i];
    rows.push_back(r);
  }
  return rows;
}

template <typename Job>
void parallel_for(std::size_t n, std::size_t threads, Job job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t k; (k = next++) < n;) {
      try {
        job(k);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  result.spec = spec;

  if (spec.kind == ExperimentKind::two_flow_surface) {
    for (auto cd : spec.surface_cd_lengths)
      for (auto split : {SurfaceSplit::all_pre, SurfaceSplit::all_post}) {
        auto pts = two_flow_surface(spec.surface_lengths, spec.surface_sizes, cd, split, spec.platform);
        result.surface.insert(result.surface.end(), pts.begin(), pts.end());
      }
    return result;
  }

  const auto jobs = spec.categories.size() * spec.sets_per_category;
  std::vector<std::vector<FlowRow>> per_job(jobs);
  parallel_for(jobs, spec.threads, [&](std::size_t k) {
    per_job[k] = run_set(spec, k / spec.sets_per_category, k % spec.sets_per_category);
  });
  for (auto& rows : per_job) result.rows.insert(result.rows.end(), rows.begin(), rows.end());

  // x-axis key -> label
  std::map<std::size_t, std::string> labels;
  auto key_of = [&](const FlowRow& r) -> std::size_t {
    if (spec.kind == ExperimentKind::priority_profile) return (r.priority_rank - 1) / spec.rank_bucket;
    return r.category;
  };
  for (const auto& r : result.rows) {
    const auto key = key_of(r);
    if (labels.count(key)) continue;
    if (spec.kind == ExperimentKind::priority_profile) {
      const auto lo = key * spec.rank_bucket + 1;
      const auto hi = lo + spec.rank_bucket - 1;
      labels[key] = lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
    } else {
      labels[key] = spec.categories[r.category].label;
    }
  }

  for (const auto& [key, label] : labels) {
    std::vector<double> values;
    std::size_t flows = 0, diverged = 0, sc = 0, st = 0;
    for (const auto& r : result.rows) {
      if (key_of(r) != key) continue;
      ++flows;
      if (r.improvement_rel)
        values.push_back(*r.improvement_rel);
      else
        ++diverged;
      sc += r.schedulable_classic;
      st += r.schedulable_tight;
    }
    auto s = summarize(label, std::move(values));
    s.flows = flows;
    s.diverged = diverged;
    s.schedulable_classic = sc;
    s.schedulable_tight = st;
    result.stats.categories.push_back(std::move(s));
  }
  return result;
}

}  // namespace wctt
