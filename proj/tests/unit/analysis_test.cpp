#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "wctt/analysis.hpp"
#include "wctt/errors.hpp"

using namespace wctt;

namespace {

FlowSet pair_on_row0(TileCoord lower_src, TileCoord lower_dst, std::uint64_t size = 48) {
  return FlowSet(PlatformConfig::reference(), {make_flow(1, {0, 0}, {5, 0}, size, 2, ns(1000)),
                                               make_flow(2, lower_src, lower_dst, size, 1, ns(1000))});
}

}  // namespace

TEST(Sigma, Formulas) {
  const auto p = PlatformConfig::reference();
  EXPECT_EQ(sigma_pre({0, 1, 0}, p), ps(0));
  EXPECT_EQ(sigma_pre({1, 1, 0}, p), ps(500));
  EXPECT_EQ(sigma_pre({3, 1, 3}, p), ps(4500));
  EXPECT_EQ(sigma_post({3, 1, 3}, p), ps(1500));
  EXPECT_EQ(sigma_post({3, 1, 0}, p), ps(0));
}

TEST(WorkedExample, ObservationOne) {
  const auto fs = fixtures::observation1();
  const auto term = interference_term(0, 1, fs);
  EXPECT_EQ(term.full_C, ns(14));
  EXPECT_EQ(term.tight_I, ns(8));
  EXPECT_EQ(term.saving(), ns(6));

  const auto r = analyze_flowset(fs);
  EXPECT_EQ(r.flows[0].C, ns(14));
  EXPECT_EQ(r.flows[0].classic.value, ns(14));
  EXPECT_EQ(r.flows[0].tight.value, ns(14));
  EXPECT_EQ(r.flows[1].C, ns(6));
  EXPECT_EQ(r.flows[1].classic.value, ns(20));
  EXPECT_EQ(r.flows[1].tight.value, ns(14));
  EXPECT_DOUBLE_EQ(*r.flows[1].improvement_rel, 0.3);
  EXPECT_TRUE(r.schedulable(Method::classic));
  EXPECT_TRUE(r.schedulable(Method::tight));
}

TEST(WorkedExample, ObservationOneIterates) {
  const auto fs = fixtures::observation1();
  const std::vector<FlowJitter> none(fs.size());
  std::vector<Picoseconds> classic, tight;
  fixed_point_wctt(1, fs, Method::classic, none, &classic);
  fixed_point_wctt(1, fs, Method::tight, none, &tight);
  EXPECT_EQ(classic, (std::vector<Picoseconds>{ns(6), ns(20), ns(20)}));
  EXPECT_EQ(tight, (std::vector<Picoseconds>{ns(6), ns(14), ns(14)}));
}

TEST(WorkedExample, ObservationFourLargerFlows) {
  const auto r = analyze_flowset(fixtures::observation1(160));
  EXPECT_EQ(r.flows[0].classic.value, ps(17500));
  EXPECT_EQ(r.flows[0].tight.value, ps(17500));
  EXPECT_EQ(r.flows[1].classic.value, ns(27));
  EXPECT_EQ(r.flows[1].tight.value, ns(21));
  EXPECT_EQ(*r.flows[1].improvement_abs, ns(6));
}

TEST(WorkedExample, ObservationThreeCdMovedEast) {
  const auto fs = pair_on_row0({3, 0}, {4, 0});
  EXPECT_EQ(interference_term(0, 1, fs).decomposition, (PathDecomposition{4, 1, 2}));
  const auto r = analyze_flowset(fs);
  EXPECT_EQ(r.flows[1].classic.value, ns(20));
  EXPECT_EQ(r.flows[1].tight.value, ps(12500));
  EXPECT_DOUBLE_EQ(*r.flows[1].improvement_rel, 0.375);
}

TEST(WorkedExample, SharedEjectionOnly) {
  const auto fs = pair_on_row0({5, 1}, {5, 0});
  EXPECT_EQ(interference_term(0, 1, fs).decomposition, (PathDecomposition{6, 1, 0}));
  const auto r = analyze_flowset(fs);
  EXPECT_EQ(r.flows[1].classic.value, ns(20));
  EXPECT_EQ(r.flows[1].tight.value, ps(9500));
}

TEST(WorkedExample, LongerContentionDomain) {
  const auto fs = pair_on_row0({1, 0}, {4, 0});
  EXPECT_EQ(interference_term(0, 1, fs).decomposition, (PathDecomposition{2, 3, 2}));
  const auto r = analyze_flowset(fs);
  EXPECT_EQ(r.flows[1].classic.value, ns(24));
  EXPECT_EQ(r.flows[1].tight.value, ps(20500));
}

TEST(InterferenceTerm, RejectsDisjointFlows) {
  const auto fs = FlowSet(PlatformConfig::reference(), {make_flow(1, {0, 0}, {1, 0}, 16, 2, ms(1)),
                                                        make_flow(2, {0, 1}, {1, 1}, 16, 1, ms(1))});
  EXPECT_THROW(interference_term(0, 1, fs), ModelViolation);
}

TEST(FixedPoint, BaseAboveDeadline) {
  const auto fp = solve_fixed_point(ps(10), ps(5), {});
  EXPECT_FALSE(fp.converged);
  EXPECT_EQ(fp.iterations, 0u);
}

TEST(FixedPoint, Diverges) {
  const Interferer j{ps(10), ps(0), ps(10)};  // 100% utilisation
  const auto fp = solve_fixed_point(ps(1), ps(1000), std::span(&j, 1));
  EXPECT_FALSE(fp.converged);
  EXPECT_GT(fp.value, ps(1000));
}

// Oracle: scan every integer R from base upward for the first solution of the
// recurrence equation.
TEST(FixedPoint, MatchesIntegerScan) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto base = ps(1 + static_cast<std::int64_t>(rng() % 50));
    const auto deadline = ps(300 + static_cast<std::int64_t>(rng() % 2000));
    std::vector<Interferer> js(rng() % 5);
    for (auto& j : js) {
      j.period = ps(5 + static_cast<std::int64_t>(rng() % 200));
      j.jitter = ps(static_cast<std::int64_t>(rng() % 40));
      j.cost = ps(1 + static_cast<std::int64_t>(rng() % 25));
    }
    std::optional<std::int64_t> oracle;
    for (std::int64_t r = base.count(); r <= deadline.count() && !oracle; ++r) {
      std::int64_t rhs = base.count();
      for (const auto& j : js) rhs += (r + j.jitter.count() + j.period.count() - 1) / j.period.count() * j.cost.count();
      if (rhs == r) oracle = r;
    }
    const auto fp = solve_fixed_point(base, deadline, js);
    ASSERT_EQ(fp.converged, oracle.has_value()) << "trial " << trial;
    if (oracle) {
      EXPECT_EQ(fp.value.count(), *oracle) << "trial " << trial;
    }
  }
}

TEST(Analysis, JitterTableSizeChecked) {
  const auto fs = fixtures::observation1();
  const std::vector<FlowJitter> wrong(1);
  EXPECT_THROW(fixed_point_wctt(1, fs, Method::classic, wrong), ConfigError);
}

// f1 > f2 > f3. f1 meets f2 at (4,0)'s ejection only; f2 and f3 share two
// eastbound links. f1 never touches f3, so f2 passes its delay on as J^I.
TEST(Analysis, IndirectInterferenceJitter) {
  const auto p = PlatformConfig::reference();
  const FlowSet fs(p, {make_flow(1, {2, 1}, {4, 0}, 64, 3, ns(2000)), make_flow(2, {0, 0}, {4, 0}, 64, 2, ns(2000)),
                       make_flow(3, {1, 0}, {3, 0}, 64, 1, ns(2000))});
  ASSERT_FALSE(fs.share_link(0, 2));

  const auto zero = analyze_flowset(fs, {JitterPolicy::zero, JitterSource::mode_consistent});
  const auto sb = analyze_flowset(fs, {JitterPolicy::shi_burns, JitterSource::mode_consistent});
  ASSERT_EQ(sb.flows[2].interferers.size(), 1u);
  const auto& rec = sb.flows[2].interferers[0];
  EXPECT_EQ(rec.term.higher_flow, 2u);
  EXPECT_EQ(zero.flows[2].interferers[0].interference_jitter_classic, ps(0));
  EXPECT_EQ(rec.interference_jitter_classic, sb.flows[1].classic.value - sb.flows[1].C);
  EXPECT_EQ(rec.interference_jitter_tight, sb.flows[1].tight.value - sb.flows[1].C);
  EXPECT_GT(rec.interference_jitter_classic, ps(0));
  EXPECT_GE(sb.flows[2].classic.value, zero.flows[2].classic.value);

  const auto cs = analyze_flowset(fs, {JitterPolicy::shi_burns, JitterSource::classic});
  EXPECT_EQ(cs.flows[2].interferers[0].interference_jitter_tight, rec.interference_jitter_classic);
}

// When f1 also crosses f3's path there is nothing indirect to inherit.
TEST(Analysis, NoJitterWhenInterfererOfInterfererIsDirect) {
  const auto p = PlatformConfig::reference();
  const FlowSet fs(p, {make_flow(1, {0, 0}, {2, 0}, 64, 3, ns(2000)), make_flow(2, {0, 0}, {3, 0}, 64, 2, ns(2000)),
                       make_flow(3, {1, 0}, {3, 0}, 64, 1, ns(2000))});
  ASSERT_TRUE(fs.share_link(0, 2));
  const auto r = analyze_flowset(fs, {JitterPolicy::shi_burns, JitterSource::mode_consistent});
  for (const auto& rec : r.flows[2].interferers) {
    EXPECT_EQ(rec.interference_jitter_classic, ps(0));
    EXPECT_EQ(rec.interference_jitter_tight, ps(0));
  }
}

TEST(Analysis, HighestPriorityFlowIsUndisturbed) {
  std::mt19937_64 rng(5);
  const auto fs = fixtures::random_flowset(rng, PlatformConfig::reference(), 50, 1024, us(5), us(50));
  const auto r = analyze_flowset(fs, {JitterPolicy::shi_burns, JitterSource::mode_consistent});
  const auto top = fs.by_priority().front();
  EXPECT_EQ(r.flows[top].priority_rank, 1u);
  EXPECT_EQ(r.flows[top].classic.value, r.flows[top].C);
  EXPECT_EQ(r.flows[top].tight.value, r.flows[top].C);
  EXPECT_EQ(*r.flows[top].improvement_rel, 0.0);
}

class TheoremOne : public ::testing::TestWithParam<JitterPolicy> {};

// Short periods so that many flows see several preemptions and some diverge.
TEST_P(TheoremOne, TightBoundBetweenBasicLatencyAndClassic) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    std::mt19937_64 rng(seed);
    const auto fs = fixtures::random_flowset(rng, PlatformConfig::reference(), 50, 2048, us(2), us(40));
    const auto r = analyze_flowset(fs, {GetParam(), JitterSource::mode_consistent});
    for (const auto& a : r.flows) {
      if (!a.classic.converged) continue;
      ASSERT_TRUE(a.tight.converged) << "seed " << seed << " flow " << a.id;
      EXPECT_LE(a.C, a.tight.value);
      EXPECT_LE(a.tight.value, a.classic.value);
      ASSERT_TRUE(a.improvement_rel);
      EXPECT_GE(*a.improvement_rel, 0.0);
      EXPECT_LT(*a.improvement_rel, 1.0);
      for (const auto& rec : a.interferers) {
        EXPECT_LE(rec.preemptions_tight, rec.preemptions_classic);
        EXPECT_LE(rec.interference_jitter_tight, rec.interference_jitter_classic);
      }
    }
  }
}

TEST_P(TheoremOne, FullOverlapGivesNoImprovement) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    std::mt19937_64 rng(seed);
    const auto fs = fixtures::random_flowset(rng, fixtures::mesh(4, 4), 30, 512, us(2), us(40));
    const auto r = analyze_flowset(fs, {GetParam(), JitterSource::classic});
    for (const auto& a : r.flows) {
      if (!a.classic.converged || a.interferers.empty()) continue;
      const bool full = std::all_of(a.interferers.begin(), a.interferers.end(), [](const InterferenceRecord& rec) {
        return rec.term.decomposition.pre_cd == 0 && rec.term.decomposition.post_cd == 0;
      });
      if (!full) continue;
      ++checked;
      EXPECT_EQ(a.tight.value, a.classic.value) << "seed " << seed << " flow " << a.id;
    }
  }
  EXPECT_GT(checked, 0u);
}

INSTANTIATE_TEST_SUITE_P(Jitter, TheoremOne, ::testing::Values(JitterPolicy::zero, JitterPolicy::shi_burns),
                         [](const auto& info) { return info.param == JitterPolicy::zero ? "Zero" : "ShiBurns"; });

// Without jitter and with equal preemption counts, R - R* is exactly the sum
// of K_j * sigma_j over the direct interferers.
TEST(Analysis, DifferenceIsSumOfSavings) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(seed);
    const auto fs = fixtures::random_flowset(rng, PlatformConfig::reference(), 50, 1024, us(5), us(60));
    const auto r = analyze_flowset(fs, {JitterPolicy::zero, JitterSource::mode_consistent});
    for (const auto& a : r.flows) {
      if (!a.classic.converged) continue;
      bool same_k = true;
      Picoseconds sum{0};
      for (const auto& rec : a.interferers) {
        same_k = same_k && rec.preemptions_classic == rec.preemptions_tight;
        sum += rec.preemptions_classic * rec.term.saving();
      }
      if (!same_k) continue;
      ++checked;
      EXPECT_EQ(a.classic.value - a.tight.value, sum);
    }
  }
  EXPECT_GT(checked, 100u);
}
