#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "wctt/analysis.hpp"
#include "wctt/errors.hpp"
#include "wctt/experiment.hpp"
#include "wctt/io.hpp"
#include "wctt/simulator.hpp"

namespace wctt::cli {

namespace fs = std::filesystem;

namespace {

struct PlatformOverrides {
  std::optional<std::uint32_t> flit_bytes;
  std::optional<std::int64_t> link_delay_ps;
  std::optional<std::int64_t> router_delay_ps;
  std::optional<std::int64_t> clock_period_ps;

  bool any() const { return flit_bytes || link_delay_ps || router_delay_ps || clock_period_ps; }
};

struct Common {
  std::string out_dir;
  std::uint64_t seed = 1;
  std::string jitter = "shi-burns";
  PlatformOverrides platform;
};

struct AnalyzeArgs {
  std::string file;
  std::string jitter_source = "mode-consistent";
};

struct SimulateArgs {
  std::string file;
  std::optional<Cycle> horizon_cycles;
  std::optional<std::uint64_t> hyper_periods;
  std::uint32_t vc_depth = 4;
  std::optional<std::uint32_t> vcs;
  std::string release = "synchronous";
  bool check_invariants = false;
  bool no_trace = false;
};

struct ExperimentArgs {
  std::string spec_file;
  std::string kind;
  std::optional<std::size_t> sets;
  std::optional<std::size_t> flows;
  std::optional<std::size_t> threads;
  bool full_scale = false;
  bool seed_given = false;
  bool jitter_given = false;
  std::string dump_dir;
};

struct SurfaceArgs {
  std::vector<std::uint64_t> lengths{3, 16};
  std::vector<std::uint64_t> sizes;
  std::vector<std::size_t> cd{1, 5, 10};
  std::optional<std::size_t> lower_links;
  std::int64_t period_ps = ms(1).count();
};

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : "nan";
}

std::string fmt_ns(Picoseconds v) { return fmt(to_ns(v)); }

JitterPolicy jitter_policy(const std::string& s) {
  return s == "zero" ? JitterPolicy::zero : JitterPolicy::shi_burns;
}

ReleaseKind release_kind(const std::string& s) {
  if (s == "phased") return ReleaseKind::phased;
  if (s == "jittered") return ReleaseKind::jittered;
  return ReleaseKind::synchronous;
}

fs::path output_dir(const Common& c) {
  fs::path dir = c.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(out_dir_env);
    dir = env && *env ? fs::path(env) : fs::path(".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory " + dir.string() + " is not writable");
  return dir;
}

void write_file(const fs::path& file, const std::string& content) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + file.string());
  f << content;
}

void write_table(const fs::path& dir, const std::string& stem, const Table& t) {
  std::ostringstream csv;
  write_csv(csv, t);
  write_file(dir / (stem + ".csv"), csv.str());
  write_file(dir / (stem + ".json"), to_json(t));
}

FlowSet load(const std::string& file, const PlatformOverrides& o) {
  auto set = load_flowset(file);
  if (!o.any()) return set;
  auto p = set.platform();
  if (o.flit_bytes) p.flit_size = *o.flit_bytes;
  if (o.link_delay_ps) p.link_delay = Picoseconds{*o.link_delay_ps};
  if (o.router_delay_ps) p.router_delay = Picoseconds{*o.router_delay_ps};
  if (o.clock_period_ps) p.clock_period = Picoseconds{*o.clock_period_ps};
  return FlowSet(p, std::vector<Flow>(set.flows().begin(), set.flows().end()));
}

int verdict(const AnalysisResult& r) {
  if (r.schedulable(Method::classic)) return ok;
  if (r.schedulable(Method::tight)) return classic_unschedulable;
  return unschedulable;
}

void print_analysis(std::ostream& out, const FlowSet& set, const AnalysisResult& r) {
  out << std::left << std::setw(8) << "flow" << std::setw(10) << "priority" << std::setw(12) << "C_ns"
      << std::setw(12) << "R_ns" << std::setw(12) << "R*_ns" << "improvement\n";
  for (auto i : set.by_priority()) {
    const auto& a = r.flows[i];
    auto bound = [](const FixedPoint& fp) { return fp.converged ? fmt_ns(fp.value) : ">" + fmt_ns(fp.value); };
    out << std::setw(8) << a.id << std::setw(10) << set.flow(i).priority << std::setw(12) << fmt_ns(a.C)
        << std::setw(12) << bound(a.classic) << std::setw(12) << bound(a.tight)
        << (a.improvement_rel ? fmt(100.0 * *a.improvement_rel) + "%" : "-") << '\n';
  }
  out << "classic: " << (r.schedulable(Method::classic) ? "schedulable" : "unschedulable")
      << ", tight: " << (r.schedulable(Method::tight) ? "schedulable" : "unschedulable") << '\n';
}

int cmd_analyze(const Common& c, const AnalyzeArgs& a, std::ostream& out) {
  const auto set = load(a.file, c.platform);
  AnalysisOptions opt;
  opt.jitter = jitter_policy(c.jitter);
  opt.jitter_source = a.jitter_source == "classic" ? JitterSource::classic : JitterSource::mode_consistent;
  const auto r = analyze_flowset(set, opt);
  const auto dir = output_dir(c);
  write_table(dir, "analysis", analysis_table(set, r));
  write_table(dir, "interference", interference_table(r));
  print_analysis(out, set, r);
  return verdict(r);
}

int cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto set = load(a.file, c.platform);
  const auto r = analyze_flowset(set, AnalysisOptions{jitter_policy(c.jitter), JitterSource::mode_consistent});

  SimConfig sc;
  sc.vc_depth = a.vc_depth;
  sc.vcs_per_port = a.vcs;
  if (a.horizon_cycles)
    sc.horizon = Cycles{*a.horizon_cycles};
  else
    sc.horizon = HyperPeriods{a.hyper_periods.value_or(2)};
  sc.release.kind = release_kind(a.release);
  sc.release.seed = c.seed;
  sc.check_invariants = a.check_invariants;
  const auto trace = simulate(set, sc);

  const auto dir = output_dir(c);
  if (!a.no_trace) {
    std::ostringstream csv;
    write_csv(csv, trace_table(trace));
    write_file(dir / "trace.csv", csv.str());
  }
  write_table(dir, "sim_summary", sim_summary_table(set, trace, r));
  write_table(dir, "analysis", analysis_table(set, r));

  out << std::left << std::setw(8) << "flow" << std::setw(8) << "pkts" << std::setw(12) << "best_ns"
      << std::setw(12) << "avg_ns" << std::setw(12) << "worst_ns" << std::setw(12) << "R_ns" << "R*_ns\n";
  for (auto i : set.by_priority()) {
    const auto& s = trace.flows[i];
    const auto& fa = r.flows[i];
    out << std::setw(8) << s.flow_id << std::setw(8) << s.completed;
    if (s.observed())
      out << std::setw(12) << fmt_ns(s.min) << std::setw(12) << fmt(s.avg_ps / 1000.0) << std::setw(12)
          << fmt_ns(s.max);
    else
      out << std::setw(12) << "censored" << std::setw(12) << "-" << std::setw(12) << "-";
    out << std::setw(12) << fmt_ns(fa.classic.value) << fmt_ns(fa.tight.value) << '\n';
    if (s.observed() && fa.tight.converged && s.max > fa.tight.value)
      err << "warning: flow " << s.flow_id << " observed " << fmt_ns(s.max) << " ns above R* "
          << fmt_ns(fa.tight.value) << " ns\n";
  }
  out << "horizon " << fmt_ns(trace.horizon) << " ns, packets completed " << trace.counters.packets_completed
      << ", censored " << trace.counters.packets_censored << '\n';
  return ok;
}

std::string file_safe(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
  return out;
}

void write_surface(const fs::path& dir, const std::vector<SurfacePoint>& pts, std::ostream& out) {
  write_table(dir, "surface", surface_table(pts));
  std::map<std::pair<std::size_t, bool>, std::pair<double, double>> span;
  for (const auto& p : pts) {
    auto [it, fresh] = span.try_emplace({p.cd, p.all_pre}, p.improvement_rel, p.improvement_rel);
    if (!fresh) {
      it->second.first = std::min(it->second.first, p.improvement_rel);
      it->second.second = std::max(it->second.second, p.improvement_rel);
    }
  }
  for (const auto& [key, range] : span)
    out << "cd=" << key.first << ' ' << (key.second ? "all-pre " : "all-post") << " improvement "
        << fmt(100.0 * range.first) << "% .. " << fmt(100.0 * range.second) << "%\n";
}

int cmd_experiment(const Common& c, const ExperimentArgs& a, std::ostream& out) {
  ExperimentSpec spec;
  if (!a.spec_file.empty())
    spec = load_experiment_spec(a.spec_file);
  else
    spec = default_spec(parse_experiment_kind(a.kind));
  if (a.full_scale) spec = full_scale(std::move(spec));
  if (a.seed_given) spec.seed = c.seed;
  if (a.jitter_given) spec.jitter = jitter_policy(c.jitter);
  if (a.sets) spec.sets_per_category = *a.sets;
  if (a.flows)
    for (auto& cat : spec.categories) cat.flows = *a.flows;
  if (a.threads) spec.threads = *a.threads;
  spec.validate();

  const auto dir = output_dir(c);
  write_file(dir / "spec.json", experiment_spec_json(spec));

  if (!a.dump_dir.empty() && spec.kind != ExperimentKind::two_flow_surface) {
    fs::create_directories(a.dump_dir);
    for (std::size_t cat = 0; cat < spec.categories.size(); ++cat)
      for (std::size_t s = 0; s < spec.sets_per_category; ++s) {
        std::ostringstream text;
        write_flowset(text, generate_flowset(spec, cat, set_seed(spec.seed, cat, s)));
        write_file(fs::path(a.dump_dir) / ("set_c" + std::to_string(cat) + "_s" + std::to_string(s) + ".flows"),
                   text.str());
      }
  }

  const auto result = run_experiment(spec);
  if (spec.kind == ExperimentKind::two_flow_surface) {
    write_surface(dir, result.surface, out);
    return ok;
  }

  const auto rows = experiment_rows_table(result);
  write_table(dir, "rows", rows);
  for (std::size_t cat = 0; cat < spec.categories.size(); ++cat) {
    Table t{rows.columns, {}};
    for (std::size_t k = 0; k < result.rows.size(); ++k)
      if (result.rows[k].category == cat) t.rows.push_back(rows.rows[k]);
    std::ostringstream name;
    name << "category_" << std::setw(2) << std::setfill('0') << cat << '_' << file_safe(spec.categories[cat].label);
    write_table(dir, name.str(), t);
  }
  write_table(dir, "summary", experiment_stats_table(result));

  out << to_string(spec.kind) << ": " << spec.categories.size() << " categories x " << spec.sets_per_category
      << " sets, seed " << spec.seed << '\n';
  out << std::left << std::setw(14) << "category" << std::setw(8) << "flows" << std::setw(12) << "median%"
      << std::setw(12) << "p25%" << std::setw(12) << "p75%" << "outliers\n";
  for (const auto& s : result.stats.categories)
    out << std::setw(14) << s.label << std::setw(8) << s.flows << std::setw(12) << fmt(100.0 * s.median)
        << std::setw(12) << fmt(100.0 * s.p25) << std::setw(12) << fmt(100.0 * s.p75) << s.outliers.size()
        << '\n';
  return ok;
}

int cmd_surface(const Common& c, const SurfaceArgs& a, std::ostream& out) {
  if (a.lengths.size() != 2 || a.lengths[0] > a.lengths[1]) throw ConfigError("--lengths takes MIN,MAX");
  auto sizes = a.sizes;
  if (sizes.empty()) sizes = default_spec(ExperimentKind::two_flow_surface).surface_sizes;
  auto platform = PlatformConfig::reference();
  if (c.platform.flit_bytes) platform.flit_size = *c.platform.flit_bytes;
  if (c.platform.link_delay_ps) platform.link_delay = Picoseconds{*c.platform.link_delay_ps};
  if (c.platform.router_delay_ps) platform.router_delay = Picoseconds{*c.platform.router_delay_ps};
  if (c.platform.clock_period_ps) platform.clock_period = Picoseconds{*c.platform.clock_period_ps};
  platform.validate();

  std::vector<SurfacePoint> pts;
  for (auto cd : a.cd)
    for (auto split : {SurfaceSplit::all_pre, SurfaceSplit::all_post}) {
      auto part = two_flow_surface({a.lengths[0], a.lengths[1]}, sizes, cd, split, platform, a.lower_links,
                                   Picoseconds{a.period_ps});
      pts.insert(pts.end(), part.begin(), part.end());
    }
  write_surface(output_dir(c), pts, out);
  return ok;
}

void add_common(CLI::App* sub, Common& c, bool with_seed, bool with_jitter) {
  sub->add_option("-o,--out", c.out_dir, std::string("Output directory (default: $") + out_dir_env + " or .)");
  if (with_seed) sub->add_option("--seed", c.seed, "Random seed");
  if (with_jitter)
    sub->add_option("--jitter", c.jitter, "Interference-jitter policy")
        ->check(CLI::IsMember({"zero", "shi-burns"}));
  sub->add_option("--flit-bytes", c.platform.flit_bytes, "Override the flit size");
  sub->add_option("--link-delay-ps", c.platform.link_delay_ps, "Override d_l");
  sub->add_option("--router-delay-ps", c.platform.router_delay_ps, "Override d_r");
  sub->add_option("--clock-period-ps", c.platform.clock_period_ps, "Override the clock period");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Worst-case traversal time analysis and simulation for wormhole NoCs", "wctt"};
  app.require_subcommand(1);

  Common common;
  AnalyzeArgs analyze;
  SimulateArgs sim;
  ExperimentArgs exp;
  SurfaceArgs surf;

  auto* a = app.add_subcommand("analyze", "Compute C, R and R* for every flow of a flow-set file");
  a->add_option("file", analyze.file, "Flow-set file")->required();
  a->add_option("--jitter-source", analyze.jitter_source, "Response times feeding J^I in tight mode")
      ->check(CLI::IsMember({"mode-consistent", "classic"}));
  add_common(a, common, false, true);

  auto* s = app.add_subcommand("simulate", "Cycle-accurate simulation of a flow-set file");
  s->add_option("file", sim.file, "Flow-set file")->required();
  auto* hc = s->add_option("--horizon-cycles", sim.horizon_cycles, "Simulated cycles");
  auto* hp = s->add_option("--hyper-periods", sim.hyper_periods, "Simulated hyper-periods (default 2)");
  hc->excludes(hp);
  s->add_option("--vc-depth", sim.vc_depth, "Flits per virtual channel")->check(CLI::PositiveNumber);
  s->add_option("--vcs", sim.vcs, "Virtual channels per input port (default: unbounded)")
      ->check(CLI::PositiveNumber);
  s->add_option("--release", sim.release, "Release policy")
      ->check(CLI::IsMember({"synchronous", "phased", "jittered"}));
  s->add_flag("--check-invariants", sim.check_invariants, "Verify buffer and link invariants every cycle");
  s->add_flag("--no-trace", sim.no_trace, "Skip the per-packet trace file");
  add_common(s, common, true, true);

  auto* e = app.add_subcommand("experiment", "Run a randomised experiment");
  e->add_option("spec", exp.spec_file, "Experiment spec (JSON)");
  auto* kind = e->add_option("--kind", exp.kind, "Built-in experiment kind instead of a spec file");
  kind->check(CLI::IsMember({"flow-size-sweep", "path-length-sweep", "joint-sweep", "flowset-size-sweep",
                             "priority-profile", "tightness", "two-flow-surface"}));
  e->add_option("--sets", exp.sets, "Flow-sets per category")->check(CLI::PositiveNumber);
  e->add_option("--flows", exp.flows, "Flows per set")->check(CLI::PositiveNumber);
  e->add_option("--threads", exp.threads, "Worker threads (0: all cores)");
  e->add_flag("--full-scale", exp.full_scale, "100 sets x 200 flows per category");
  e->add_option("--dump-flowsets", exp.dump_dir, "Also write every generated flow-set to this directory");
  add_common(e, common, true, true);

  auto* f = app.add_subcommand("surface", "Two-flow improvement surface over path length and size");
  f->add_option("--lengths", surf.lengths, "MIN,MAX of |L_1|")->delimiter(',')->expected(2);
  f->add_option("--sizes", surf.sizes, "Flow sizes in bytes")->delimiter(',');
  f->add_option("--cd", surf.cd, "Contention-domain lengths")->delimiter(',');
  f->add_option("--lower-links", surf.lower_links, "Path length of f_2 (default: |L_1|)");
  f->add_option("--period-ps", surf.period_ps, "Period of both flows")->check(CLI::PositiveNumber);
  add_common(f, common, false, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? ok : input_error;
  }

  try {
    if (a->parsed()) return cmd_analyze(common, analyze, out);
    if (s->parsed()) return cmd_simulate(common, sim, out, err);
    if (e->parsed()) {
      if (exp.spec_file.empty() == exp.kind.empty()) {
        err << "error: give either a spec file or --kind\n";
        return input_error;
      }
      exp.seed_given = e->count("--seed") > 0;
      exp.jitter_given = e->count("--jitter") > 0;
      return cmd_experiment(common, exp, out);
    }
    return cmd_surface(common, surf, out);
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return input_error;
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return input_error;
  } catch (const ModelViolation& ex) {
    err << "model violation: " << ex.what() << '\n';
    return model_error;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return input_error;
  }
}

}  // namespace wctt::cli
