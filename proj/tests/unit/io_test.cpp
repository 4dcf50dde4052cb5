#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "wctt/errors.hpp"
#include "wctt/experiment.hpp"
#include "wctt/io.hpp"

using namespace wctt;

namespace {

FlowSet parse(const std::string& text) {
  std::istringstream in(text);
  return read_flowset(in);
}

// Runs the parser and returns the error, failing the test if none is raised.
ParseError parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return ParseError(0, "", "");
}

const std::string kHeader =
    "platform rows=8 cols=8 flit_bytes=16 link_delay_ps=500 router_delay_ps=1500 clock_period_ps=500\n";

}  // namespace

TEST(FlowSetFile, ParsesObservationOne) {
  const auto fs = load_flowset(WCTT_DATA_DIR "/observation1.flows");
  EXPECT_TRUE(fs == fixtures::observation1());
}

TEST(FlowSetFile, PlatformDefaultsAndComments) {
  const auto fs = parse("# only flows\n\nflow id=3 src=1,1 dst=2,1 size_bytes=10 priority=5 period_ps=2000 # tail\n");
  EXPECT_EQ(fs.platform(), PlatformConfig::reference());
  EXPECT_EQ(fs.flow(0).release_jitter, ps(0));
  EXPECT_EQ(fs.flow(0).deadline, ps(2000));
}

TEST(FlowSetFile, PartialPlatformHeader) {
  const auto fs = parse("platform rows=4 cols=3\nflow id=1 src=2,3 dst=0,0 size_bytes=1 priority=1 period_ps=500\n");
  EXPECT_EQ(fs.platform().rows, 4u);
  EXPECT_EQ(fs.platform().cols, 3u);
  EXPECT_EQ(fs.platform().flit_size, 16u);
}

TEST(FlowSetFile, RoundTripsGeneratedSets) {
  const auto spec = default_spec(ExperimentKind::path_length_sweep);
  for (std::size_t cat = 0; cat < spec.categories.size(); ++cat) {
    const auto fs = generate_flowset(spec, cat, 1000 + cat);
    std::stringstream buf;
    write_flowset(buf, fs);
    EXPECT_TRUE(read_flowset(buf) == fs);
  }
  auto tight = default_spec(ExperimentKind::tightness);
  const auto fs = generate_flowset(tight, 0, 4);
  std::stringstream buf;
  write_flowset(buf, fs);
  EXPECT_TRUE(read_flowset(buf) == fs);
}

TEST(FlowSetFile, EmptyFlowListIsAnError) {
  const auto e = parse_error(kHeader);
  EXPECT_NE(std::string(e.what()).find("no flows"), std::string::npos);
  parse_error("");
}

TEST(FlowSetFile, ErrorsCarryLineAndField) {
  auto e = parse_error(kHeader + "flow id=1 src=0,0 dst=9,0 size_bytes=1 priority=1 period_ps=500\n");
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.field(), "dst");

  e = parse_error(kHeader +
                  "flow id=1 src=0,0 dst=1,0 size_bytes=1 priority=1 period_ps=500\n"
                  "flow id=2 src=0,1 dst=1,1 size_bytes=1 priority=1 period_ps=500\n");
  EXPECT_EQ(e.line(), 3u);
  EXPECT_EQ(e.field(), "priority");
  EXPECT_NE(std::string(e.what()).find("flow 2"), std::string::npos);

  e = parse_error("flow id=1 src=0,0 dst=1,0 size_bytes=1 priority=1 period_ps=500\n"
                  "flow id=1 src=0,1 dst=1,1 size_bytes=1 priority=2 period_ps=500\n");
  EXPECT_EQ(e.field(), "id");

  e = parse_error("flow id=1 src=0,0 dst=0,0 size_bytes=1 priority=1 period_ps=500\n");
  EXPECT_EQ(e.field(), "dst");
  e = parse_error("flow id=1 src=0,0 dst=1,0 size_bytes=0 priority=1 period_ps=500\n");
  EXPECT_EQ(e.field(), "size_bytes");
  e = parse_error("flow id=1 src=0,0 dst=1,0 size_bytes=4 priority=1\n");
  EXPECT_EQ(e.field(), "period_ps");
  e = parse_error("flow id=1 src=0,0 dst=1,0 size_bytes=4 priority=1 period_ps=12ms\n");
  EXPECT_EQ(e.field(), "period_ps");
  e = parse_error("flow id=1 src=00 dst=1,0 size_bytes=4 priority=1 period_ps=1\n");
  EXPECT_EQ(e.field(), "src");
  e = parse_error("flow id=1 src=0,0 dst=1,0 size_bytes=4 priority=1 period_ps=1 colour=red\n");
  EXPECT_EQ(e.field(), "colour");
  e = parse_error("route id=1\n");
  EXPECT_EQ(e.field(), "route");
  e = parse_error("platform rows=0\n");
  EXPECT_EQ(e.line(), 1u);
  e = parse_error("flow id=1 src=0,0 dst=1,0 size_bytes=4 priority=1 period_ps=1\n" + kHeader);
  EXPECT_EQ(e.line(), 2u);
}

TEST(Tables, CsvAndJsonMirrorEachOther) {
  Table t{{"a", "b", "c", "d"}, {{std::int64_t{-3}, std::string("x,y"), 0.25, Cell{}}, {true, std::uint64_t{7}, 1.0, false}}};
  std::ostringstream csv;
  write_csv(csv, t);
  EXPECT_EQ(csv.str(), "a,b,c,d\n-3,\"x,y\",0.25,\ntrue,7,1,false\n");
  const auto json = to_json(t);
  EXPECT_NE(json.find("\"b\": \"x,y\""), std::string::npos);
  EXPECT_NE(json.find("\"d\": null"), std::string::npos);
}

TEST(Tables, AnalysisTableHoldsWorkedExample) {
  const auto fs = fixtures::observation1();
  const auto r = analyze_flowset(fs);
  const auto t = analysis_table(fs, r);
  ASSERT_EQ(t.rows.size(), 2u);
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(t.columns.begin(), t.columns.end(), name) - t.columns.begin());
  };
  EXPECT_EQ(std::get<std::int64_t>(t.rows[1][col("C_ps")]), 6000);
  EXPECT_EQ(std::get<std::int64_t>(t.rows[1][col("R_ps")]), 20000);
  EXPECT_EQ(std::get<std::int64_t>(t.rows[1][col("Rstar_ps")]), 14000);
  const auto it = interference_table(r);
  ASSERT_EQ(it.rows.size(), 1u);
  EXPECT_EQ(std::get<std::int64_t>(it.rows[0][8]), 8000);  // I_ps
}

TEST(ExperimentSpecJson, RoundTrip) {
  for (auto k : {ExperimentKind::flow_size_sweep, ExperimentKind::tightness, ExperimentKind::two_flow_surface,
                 ExperimentKind::priority_profile}) {
    const auto spec = default_spec(k);
    const auto again = parse_experiment_spec(experiment_spec_json(spec));
    EXPECT_EQ(experiment_spec_json(again), experiment_spec_json(spec));
    EXPECT_EQ(again.categories, spec.categories);
    EXPECT_EQ(again.periods, spec.periods);
    EXPECT_EQ(again.platform, spec.platform);
  }
}

TEST(ExperimentSpecJson, DefaultsAndOverrides) {
  const auto spec = parse_experiment_spec(R"({"kind": "flow-size-sweep", "seed": 9, "flows_per_set": 5,
                                               "sets_per_category": 2, "jitter": "zero"})");
  EXPECT_EQ(spec.seed, 9u);
  EXPECT_EQ(spec.sets_per_category, 2u);
  EXPECT_EQ(spec.jitter, JitterPolicy::zero);
  EXPECT_EQ(spec.categories.size(), 8u);
  for (const auto& c : spec.categories) EXPECT_EQ(c.flows, 5u);
}

TEST(ExperimentSpecJson, Rejections) {
  EXPECT_THROW(parse_experiment_spec("{"), ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"seed": 1})"), ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"kind": "flow-size-sweep", "colour": 1})"), ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"kind": "flow-size-sweep", "seed": "x"})"), ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"kind": "flow-size-sweep", "categories": []})"), ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"kind": "flow-size-sweep", "jitter": "some"})"), ConfigError);
  EXPECT_THROW(parse_experiment_spec(R"({"kind": "path-length-sweep",
      "categories": [{"label": "x", "path_links": [30, 40]}]})"), ConfigError);
}
