#include "wctt/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "wctt/errors.hpp"

namespace wctt {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <typename T>
T parse_int(std::string_view text, std::size_t line, const std::string& field) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ParseError(line, field, "expected an integer, got '" + std::string(text) + "'");
  return v;
}

TileCoord parse_tile(std::string_view text, std::size_t line, const std::string& field) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw ParseError(line, field, "expected 'x,y'");
  return {parse_int<std::uint32_t>(text.substr(0, comma), line, field),
          parse_int<std::uint32_t>(text.substr(comma + 1), line, field)};
}

using Fields = std::map<std::string, std::string_view>;

Fields parse_fields(const std::vector<std::string_view>& tokens, std::size_t line,
                    const std::set<std::string>& allowed) {
  Fields out;
  for (std::size_t k = 1; k < tokens.size(); ++k) {
    const auto eq = tokens[k].find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ParseError(line, std::string(tokens[k]), "expected key=value");
    std::string key(tokens[k].substr(0, eq));
    if (!allowed.count(key)) throw ParseError(line, key, "unknown field");
    if (!out.emplace(key, tokens[k].substr(eq + 1)).second) throw ParseError(line, key, "field given twice");
  }
  return out;
}

std::string_view require(const Fields& f, const std::string& key, std::size_t line) {
  const auto it = f.find(key);
  if (it == f.end()) throw ParseError(line, key, "missing required field");
  return it->second;
}

}  // namespace

FlowSet read_flowset(std::istream& in) {
  PlatformConfig platform = PlatformConfig::reference();
  bool seen_platform = false;
  std::vector<Flow> flows;
  std::set<FlowId> ids;
  std::set<std::int64_t> priorities;

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view sv(text);
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    const auto tokens = split_ws(sv);
    if (tokens.empty()) continue;

    if (tokens[0] == "platform") {
      if (seen_platform) throw ParseError(line, "", "second platform record");
      if (!flows.empty()) throw ParseError(line, "", "platform record must precede all flows");
      seen_platform = true;
      const auto f = parse_fields(
          tokens, line, {"rows", "cols", "flit_bytes", "link_delay_ps", "router_delay_ps", "clock_period_ps"});
      auto get = [&](const char* key, auto current) {
        const auto it = f.find(key);
        return it == f.end() ? current : parse_int<decltype(current)>(it->second, line, key);
      };
      platform.rows = get("rows", platform.rows);
      platform.cols = get("cols", platform.cols);
      platform.flit_size = get("flit_bytes", platform.flit_size);
      platform.link_delay = Picoseconds{get("link_delay_ps", platform.link_delay.count())};
      platform.router_delay = Picoseconds{get("router_delay_ps", platform.router_delay.count())};
      platform.clock_period = Picoseconds{get("clock_period_ps", platform.clock_period.count())};
      try {
        platform.validate();
      } catch (const ConfigError& e) {
        throw ParseError(line, "", e.what());
      }
    } else if (tokens[0] == "flow") {
      const auto f = parse_fields(tokens, line,
                                  {"id", "src", "dst", "size_bytes", "priority", "period_ps", "jitter_ps"});
      Flow flow;
      flow.id = parse_int<FlowId>(require(f, "id", line), line, "id");
      flow.src = parse_tile(require(f, "src", line), line, "src");
      flow.dst = parse_tile(require(f, "dst", line), line, "dst");
      flow.size = parse_int<std::uint64_t>(require(f, "size_bytes", line), line, "size_bytes");
      flow.priority = parse_int<std::int64_t>(require(f, "priority", line), line, "priority");
      flow.period = Picoseconds{parse_int<std::int64_t>(require(f, "period_ps", line), line, "period_ps")};
      flow.deadline = flow.period;
      if (const auto it = f.find("jitter_ps"); it != f.end())
        flow.release_jitter = Picoseconds{parse_int<std::int64_t>(it->second, line, "jitter_ps")};

      const auto who = "flow " + std::to_string(flow.id) + ": ";
      if (!ids.insert(flow.id).second) throw ParseError(line, "id", who + "duplicate id");
      if (!priorities.insert(flow.priority).second) throw ParseError(line, "priority", who + "duplicate priority");
      if (!in_bounds(flow.src, platform)) throw ParseError(line, "src", who + "tile outside the mesh");
      if (!in_bounds(flow.dst, platform)) throw ParseError(line, "dst", who + "tile outside the mesh");
      if (flow.src == flow.dst) throw ParseError(line, "dst", who + "destination equals source");
      if (flow.size < 1) throw ParseError(line, "size_bytes", who + "size must be at least 1 byte");
      if (flow.period.count() <= 0) throw ParseError(line, "period_ps", who + "period must be positive");
      if (flow.release_jitter.count() < 0) throw ParseError(line, "jitter_ps", who + "jitter must be non-negative");
      flows.push_back(flow);
    } else {
      throw ParseError(line, std::string(tokens[0]), "unknown record type");
    }
  }
  if (flows.empty()) throw ParseError(line, "", "flow-set contains no flows");
  return FlowSet(platform, std::move(flows));
}

FlowSet load_flowset(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open flow-set file " + file.string());
  return read_flowset(in);
}

void write_flowset(std::ostream& out, const FlowSet& fs) {
  const auto& p = fs.platform();
  out << "platform rows=" << p.rows << " cols=" << p.cols << " flit_bytes=" << p.flit_size
      << " link_delay_ps=" << p.link_delay.count() << " router_delay_ps=" << p.router_delay.count()
      << " clock_period_ps=" << p.clock_period.count() << '\n';
  for (const auto& f : fs.flows()) {
    out << "flow id=" << f.id << " src=" << f.src.x << ',' << f.src.y << " dst=" << f.dst.x << ',' << f.dst.y
        << " size_bytes=" << f.size << " priority=" << f.priority << " period_ps=" << f.period.count()
        << " jitter_ps=" << f.release_jitter.count() << '\n';
  }
}

// --- tables ----------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) {
            if (ch == '"') q += '"';
            q += ch;
          }
          return q + '"';
        } else {
          return std::to_string(v);
        }
      },
      c);
}

ordered_json json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return nullptr;
        else
          return v;
      },
      c);
}

ordered_json table_json(const Table& t) {
  auto arr = ordered_json::array();
  for (const auto& row : t.rows) {
    ordered_json obj = ordered_json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) obj[t.columns[c]] = json_cell(row[c]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

Cell i64(std::int64_t v) { return v; }
Cell u64(std::uint64_t v) { return v; }
Cell psc(Picoseconds v) { return v.count(); }

template <typename T, typename F>
Cell maybe(const std::optional<T>& v, F f) {
  return v ? f(*v) : Cell{};
}

}  // namespace

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << '\n';
  }
}

std::string to_json(const Table& t) { return table_json(t).dump(2) + "\n"; }

std::string to_json(const std::vector<std::pair<std::string, const Table*>>& tables) {
  ordered_json doc = ordered_json::object();
  for (const auto& [name, t] : tables) doc[name] = table_json(*t);
  return doc.dump(2) + "\n";
}

Table analysis_table(const FlowSet& fs, const AnalysisResult& r) {
  Table t;
  t.columns = {"flow_id",         "priority",         "priority_rank",      "src_x",
               "src_y",           "dst_x",            "dst_y",              "path_links",
               "size_bytes",      "period_ps",        "deadline_ps",        "jitter_ps",
               "C_ps",            "R_ps",             "R_converged",        "R_iterations",
               "Rstar_ps",        "Rstar_converged",  "Rstar_iterations",   "schedulable_classic",
               "schedulable_tight", "improvement_abs_ps", "improvement_rel"};
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& f = fs.flow(i);
    const auto& a = r.flows[i];
    t.rows.push_back({u64(f.id), i64(f.priority), u64(a.priority_rank), u64(f.src.x), u64(f.src.y), u64(f.dst.x),
                      u64(f.dst.y), u64(fs.path(i).size()), u64(f.size), psc(f.period), psc(f.deadline),
                      psc(f.release_jitter), psc(a.C), psc(a.classic.value), a.classic.converged,
                      u64(a.classic.iterations), psc(a.tight.value), a.tight.converged, u64(a.tight.iterations),
                      a.schedulable_classic, a.schedulable_tight, maybe(a.improvement_abs, psc),
                      maybe(a.improvement_rel, [](double v) { return Cell{v}; })});
  }
  return t;
}

Table interference_table(const AnalysisResult& r) {
  Table t;
  t.columns = {"higher_flow",   "lower_flow",   "pre_cd",        "cd",
               "post_cd",       "C_ps",         "sigma_pre_ps",  "sigma_post_ps",
               "I_ps",          "JI_classic_ps", "JI_tight_ps",  "preemptions_classic",
               "preemptions_tight"};
  for (const auto& a : r.flows)
    for (const auto& rec : a.interferers) {
      const auto& term = rec.term;
      t.rows.push_back({u64(term.higher_flow), u64(term.lower_flow), u64(term.decomposition.pre_cd),
                        u64(term.decomposition.cd), u64(term.decomposition.post_cd), psc(term.full_C),
                        psc(term.sigma_pre), psc(term.sigma_post), psc(term.tight_I),
                        psc(rec.interference_jitter_classic), psc(rec.interference_jitter_tight),
                        i64(rec.preemptions_classic), i64(rec.preemptions_tight)});
    }
  return t;
}

Table trace_table(const SimTrace& tr) {
  Table t;
  t.columns = {"flow_id", "release_ps", "completion_ps", "latency_ps"};
  for (const auto& p : tr.packets)
    t.rows.push_back({u64(p.flow_id), psc(p.release), psc(p.completion), psc(p.latency)});
  return t;
}

Table sim_summary_table(const FlowSet& fs, const SimTrace& tr, const AnalysisResult& r) {
  Table t;
  t.columns = {"flow_id", "priority", "completed", "censored", "all_censored", "best_ps", "avg_ps",
               "worst_ps", "C_ps",    "R_ps",     "Rstar_ps",  "Rstar_converged", "worst_within_Rstar"};
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& s = tr.flows[i];
    const auto& a = r.flows[i];
    const bool obs = s.observed();
    t.rows.push_back({u64(s.flow_id), i64(fs.flow(i).priority), u64(s.completed), u64(s.censored), !obs,
                      obs ? psc(s.min) : Cell{}, obs ? Cell{s.avg_ps} : Cell{}, obs ? psc(s.max) : Cell{},
                      psc(a.C), psc(a.classic.value), psc(a.tight.value), a.tight.converged,
                      obs && a.tight.converged ? Cell{s.max <= a.tight.value} : Cell{}});
  }
  return t;
}

Table experiment_rows_table(const ExperimentResult& r) {
  Table t;
  t.columns = {"category",        "category_label",  "set",         "flow",           "priority_rank",
               "path_links",      "size_bytes",      "period_ps",   "C_ps",           "R_ps",
               "R_converged",     "Rstar_ps",        "Rstar_converged", "schedulable_classic", "schedulable_tight",
               "improvement_abs_ps", "improvement_rel", "observed_min_ps", "observed_avg_ps", "observed_max_ps"};
  for (const auto& row : r.rows) {
    const bool obs = row.observed && row.observed->observed();
    t.rows.push_back({u64(row.category), r.spec.categories[row.category].label, u64(row.set), u64(row.flow),
                      u64(row.priority_rank), u64(row.path_links), u64(row.size), psc(row.period), psc(row.C),
                      psc(row.classic.value), row.classic.converged, psc(row.tight.value), row.tight.converged,
                      row.schedulable_classic, row.schedulable_tight, maybe(row.improvement_abs, psc),
                      maybe(row.improvement_rel, [](double v) { return Cell{v}; }),
                      obs ? psc(row.observed->min) : Cell{}, obs ? Cell{row.observed->avg_ps} : Cell{},
                      obs ? psc(row.observed->max) : Cell{}});
  }
  return t;
}

Table experiment_stats_table(const ExperimentResult& r) {
  Table t;
  t.columns = {"category", "flows", "samples", "diverged", "min", "p25", "median", "p75", "max", "mean",
               "outliers", "schedulable_classic", "schedulable_tight"};
  for (const auto& s : r.stats.categories)
    t.rows.push_back({s.label, u64(s.flows), u64(s.samples), u64(s.diverged), s.min, s.p25, s.median, s.p75, s.max,
                      s.mean, u64(s.outliers.size()), u64(s.schedulable_classic), u64(s.schedulable_tight)});
  return t;
}

Table surface_table(const std::vector<SurfacePoint>& points) {
  Table t;
  t.columns = {"cd",      "split",   "higher_links", "lower_links", "size_bytes",     "pre_cd",
               "post_cd", "R_ps",    "Rstar_ps",     "improvement_rel"};
  for (const auto& p : points)
    t.rows.push_back({u64(p.cd), std::string(p.all_pre ? "all-pre" : "all-post"), u64(p.higher_links),
                      u64(p.lower_links), u64(p.size), u64(p.decomposition.pre_cd), u64(p.decomposition.post_cd),
                      psc(p.R), psc(p.R_tight), p.improvement_rel});
  return t;
}

// --- experiment specs ------------------------------------------------------

namespace {

std::string release_name(ReleaseKind k) {
  switch (k) {
    case ReleaseKind::synchronous: return "synchronous";
    case ReleaseKind::phased: return "phased";
    case ReleaseKind::jittered: return "jittered";
  }
  return "?";
}

ReleaseKind parse_release(const std::string& s) {
  for (auto k : {ReleaseKind::synchronous, ReleaseKind::phased, ReleaseKind::jittered})
    if (release_name(k) == s) return k;
  throw ConfigError("unknown release policy '" + s + "'");
}

JitterPolicy parse_jitter(const std::string& s) {
  if (s == "zero") return JitterPolicy::zero;
  if (s == "shi-burns") return JitterPolicy::shi_burns;
  throw ConfigError("unknown jitter policy '" + s + "'");
}

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

Range parse_range(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + " must be a [min, max] pair");
  return {j[0].get<std::uint64_t>(), j[1].get<std::uint64_t>()};
}

PlatformConfig parse_platform(const nlohmann::json& j, PlatformConfig p) {
  check_keys(j, {"rows", "cols", "flit_bytes", "link_delay_ps", "router_delay_ps", "clock_period_ps"}, "platform");
  if (j.contains("rows")) p.rows = j["rows"].get<std::uint32_t>();
  if (j.contains("cols")) p.cols = j["cols"].get<std::uint32_t>();
  if (j.contains("flit_bytes")) p.flit_size = j["flit_bytes"].get<std::uint32_t>();
  if (j.contains("link_delay_ps")) p.link_delay = Picoseconds{j["link_delay_ps"].get<std::int64_t>()};
  if (j.contains("router_delay_ps")) p.router_delay = Picoseconds{j["router_delay_ps"].get<std::int64_t>()};
  if (j.contains("clock_period_ps")) p.clock_period = Picoseconds{j["clock_period_ps"].get<std::int64_t>()};
  return p;
}

ordered_json platform_json(const PlatformConfig& p) {
  return {{"rows", p.rows},
          {"cols", p.cols},
          {"flit_bytes", p.flit_size},
          {"link_delay_ps", p.link_delay.count()},
          {"router_delay_ps", p.router_delay.count()},
          {"clock_period_ps", p.clock_period.count()}};
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  try {
    check_keys(j,
               {"kind", "categories", "sets_per_category", "flows_per_set", "seed", "platform", "periods", "jitter",
                "rank_bucket", "vc_depth", "hyper_periods", "release", "surface", "threads"},
               "experiment spec");
    if (!j.contains("kind")) throw ConfigError("experiment spec needs a 'kind'");
    auto spec = default_spec(parse_experiment_kind(j["kind"].get<std::string>()));

    if (j.contains("platform")) spec.platform = parse_platform(j["platform"], spec.platform);
    if (j.contains("sets_per_category")) spec.sets_per_category = j["sets_per_category"].get<std::size_t>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) spec.threads = j["threads"].get<std::size_t>();
    if (j.contains("jitter")) spec.jitter = parse_jitter(j["jitter"].get<std::string>());
    if (j.contains("rank_bucket")) spec.rank_bucket = j["rank_bucket"].get<std::size_t>();
    if (j.contains("vc_depth")) spec.vc_depth = j["vc_depth"].get<std::uint32_t>();
    if (j.contains("hyper_periods")) spec.hyper_periods = j["hyper_periods"].get<std::uint64_t>();
    if (j.contains("release")) spec.release = parse_release(j["release"].get<std::string>());

    if (j.contains("periods")) {
      const auto& p = j["periods"];
      check_keys(p, {"min_ps", "max_ps", "grid", "quantum_ps"}, "periods");
      if (p.contains("min_ps")) spec.periods.min = Picoseconds{p["min_ps"].get<std::int64_t>()};
      if (p.contains("max_ps")) spec.periods.max = Picoseconds{p["max_ps"].get<std::int64_t>()};
      if (p.contains("grid")) spec.periods.grid = p["grid"].get<std::vector<std::uint32_t>>();
      if (p.contains("quantum_ps")) spec.periods.quantum = Picoseconds{p["quantum_ps"].get<std::int64_t>()};
    }

    if (j.contains("categories")) {
      if (!j["categories"].is_array()) throw ConfigError("categories must be an array");
      spec.categories.clear();
      for (const auto& c : j["categories"]) {
        check_keys(c, {"label", "size_bytes", "path_links", "flows"}, "category");
        CategorySpec cat;
        if (c.contains("size_bytes")) cat.size_bytes = parse_range(c["size_bytes"], "size_bytes");
        if (c.contains("path_links")) cat.path_links = parse_range(c["path_links"], "path_links");
        if (c.contains("flows")) cat.flows = c["flows"].get<std::size_t>();
        cat.label = c.contains("label") ? c["label"].get<std::string>() : std::to_string(spec.categories.size());
        spec.categories.push_back(cat);
      }
    }
    if (j.contains("flows_per_set")) {
      const auto n = j["flows_per_set"].get<std::size_t>();
      for (auto& c : spec.categories) c.flows = n;
    }

    if (j.contains("surface")) {
      const auto& s = j["surface"];
      check_keys(s, {"lengths", "sizes", "cd_lengths"}, "surface");
      if (s.contains("lengths")) spec.surface_lengths = parse_range(s["lengths"], "surface lengths");
      if (s.contains("sizes")) spec.surface_sizes = s["sizes"].get<std::vector<std::uint64_t>>();
      if (s.contains("cd_lengths")) spec.surface_cd_lengths = s["cd_lengths"].get<std::vector<std::size_t>>();
    }

    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid experiment spec: ") + e.what());
  }
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open experiment spec " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str());
}

std::string experiment_spec_json(const ExperimentSpec& s) {
  ordered_json j;
  j["kind"] = to_string(s.kind);
  j["seed"] = s.seed;
  j["sets_per_category"] = s.sets_per_category;
  j["jitter"] = to_string(s.jitter);
  j["platform"] = platform_json(s.platform);
  j["periods"] = {{"min_ps", s.periods.min.count()},
                  {"max_ps", s.periods.max.count()},
                  {"grid", s.periods.grid},
                  {"quantum_ps", s.periods.quantum.count()}};
  auto cats = ordered_json::array();
  for (const auto& c : s.categories) {
    ordered_json cj{{"label", c.label}, {"size_bytes", {c.size_bytes.min, c.size_bytes.max}}, {"flows", c.flows}};
    if (c.path_links) cj["path_links"] = {c.path_links->min, c.path_links->max};
    cats.push_back(std::move(cj));
  }
  j["categories"] = std::move(cats);
  j["rank_bucket"] = s.rank_bucket;
  j["vc_depth"] = s.vc_depth;
  j["hyper_periods"] = s.hyper_periods;
  j["release"] = release_name(s.release);
  j["surface"] = {{"lengths", {s.surface_lengths.min, s.surface_lengths.max}},
                  {"sizes", s.surface_sizes},
                  {"cd_lengths", s.surface_cd_lengths}};
  return j.dump(2) + "\n";
}

}  // namespace wctt
