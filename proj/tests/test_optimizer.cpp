#include <gtest/gtest.h>

#include <random>

#include "cstariff/optimizer.hpp"
#include "support/oracles.hpp"

using namespace cstariff;
using cstariff::fixtures::sample_dynamic;
using cstariff::fixtures::sample_static;

namespace {

double expected_hours_above(const ScenarioSet& set, double x, bool inclusive) {
  double h = 0.0;
  for (const auto& sc : set.scenarios()) {
    for (double v : sc.series.loads()) {
      if (v > x || (inclusive && v == x)) h += sc.probability;
    }
  }
  return h;
}

}  // namespace

TEST(OptimizeStatic, ConstantLoadSubscribesToIt) {
  const ScenarioSet set({{HourlyLoadSeries("c", "2015", std::vector<double>(8760, 2.0)), 1.0}});
  const auto r = optimize_static(set, sample_static());
  EXPECT_EQ(r.decision.level, 2.0);
  // Brute force agrees.
  auto f = [&](double x) { return expected_cost(set, sample_static(), x).total_monetary; };
  const auto g = fixtures::grid_minimum(f, 4.0, 1e-3);
  EXPECT_NEAR(g.level, 2.0, 1e-9);
  EXPECT_LE(r.expected_breakdown.total_monetary, g.cost * (1 + 1e-12));
}

TEST(OptimizeStatic, QuantileRuleMatchesEnumeration) {
  std::mt19937_64 rng(21);
  const auto set = fixtures::random_scenario_set(rng, 8760, 2, true);
  const auto book = sample_static();
  const auto r = optimize_static(set, book);
  const double target = 67.5 / 0.095;
  EXPECT_LE(expected_hours_above(set, r.decision.level, false), target);
  EXPECT_GE(expected_hours_above(set, r.decision.level, true), target);
  // Enumerate the expected cost at every candidate with the hand oracle.
  const auto cands = static_candidates(set);
  double best = fixtures::static_cost_by_hand(set, book, cands[0]);
  double best_x = cands[0];
  for (std::size_t i = 1; i < cands.size(); i += 1) {
    const double c = fixtures::static_cost_by_hand(set, book, cands[i]);
    if (c < best) { best = c; best_x = cands[i]; }
  }
  EXPECT_NEAR(r.expected_breakdown.total_monetary, best, 1e-9 * best);
  EXPECT_NEAR(r.decision.level, best_x, 1e-12);
}

TEST(OptimizeStatic, ResultReevaluates) {
  std::mt19937_64 rng(22);
  const auto set = fixtures::random_scenario_set(rng, 500, 3);
  const auto r = optimize_static(set, sample_static());
  const auto again = expected_cost(set, sample_static(), r.decision.level);
  EXPECT_EQ(r.expected_breakdown.total_monetary, again.total_monetary);
  EXPECT_GT(r.candidate_count, 1u);
  EXPECT_TRUE(std::holds_alternative<policy::Stochastic>(r.decision.policy));
}

TEST(OptimizeStatic, IllPosedWithoutExcessPremium) {
  const ScenarioSet set({{HourlyLoadSeries("c", "w", {1.0}), 1.0}});
  TariffBook b = sample_static();
  b.excess_price = b.energy_price;
  EXPECT_THROW(optimize_static(set, b), IllPosed);
  EXPECT_THROW(optimize_static(set, sample_dynamic()), DomainError);
}

TEST(OptimizeStatic, ArgminInvariantUnderPriceRatioScaling) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto set = fixtures::random_scenario_set(rng, 300, 2);
    const TariffBook a = TariffBook::static_cs(135, 67.5 * 0.02, 0.005, 0.10);
    // Same C^sub/(C^h-C^l) ratio, every term scaled by 3.
    const TariffBook b = TariffBook::static_cs(135, 67.5 * 0.06, 0.015, 0.30);
    EXPECT_EQ(optimize_static(set, a).decision.level, optimize_static(set, b).decision.level);
  }
}

TEST(OptimizeStatic, MinimumLevelIsHonoured) {
  const ScenarioSet set({{HourlyLoadSeries("c", "w", std::vector<double>(100, 1.0)), 1.0}});
  OptimizerOptions opts;
  opts.min_level = 2.5;
  EXPECT_EQ(optimize_static(set, sample_static(), opts).decision.level, 2.5);
  opts.min_level = 0.5;
  // Load exceeds the 0.5 floor in only 100 hours, below the 710-hour target.
  EXPECT_EQ(optimize_static(set, sample_static(), opts).decision.level, 0.5);
}

TEST(OptimizeStatic, SingleScenarioEqualsDeterministic) {
  std::mt19937_64 rng(24);
  const HourlyLoadSeries s("c", "2015", fixtures::random_loads(rng, 2000));
  const ScenarioSet set({{s, 1.0}});
  const auto stoch = optimize_static(set, sample_static());
  const auto det = optimize_deterministic(s, sample_static());
  EXPECT_EQ(stoch.decision.level, det.decision.level);
  EXPECT_EQ(std::get<policy::Deterministic>(det.decision.policy).year_label, "2015");
}

TEST(OptimizeStatic, DeterministicDominatesStochasticPerScenario) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    const auto set = fixtures::random_scenario_set(rng, 1000, 3);
    const double x_stoch = optimize_static(set, sample_static()).decision.level;
    for (const auto& sc : set.scenarios()) {
      const double x_det = optimize_deterministic(sc.series, sample_static()).decision.level;
      EXPECT_LE(cost_static_cs(sc.series, sample_static(), x_det).total_monetary,
                cost_static_cs(sc.series, sample_static(), x_stoch).total_monetary + 1e-9);
    }
  }
}

TEST(OptimizeDynamic, NoActivationsSubscribesZero) {
  std::mt19937_64 rng(31);
  const auto set = fixtures::random_scenario_set(rng, 500, 3);
  DynamicContext ctx;
  for (const auto& sc : set.scenarios()) {
    ctx.schedules.push_back({sc.series.year_label(), {}, 1.0});
    ctx.stacks.push_back(build_segment_stack({5, 8}, sc.series.peak(), 10));
  }
  const auto r = optimize_dynamic(set, sample_dynamic(), ctx);
  EXPECT_EQ(r.decision.level, 0.0);
}

namespace {
// Flat 2 kW profile with the first `active` hours limited.
std::pair<ScenarioSet, DynamicContext> flat_with_activations(std::size_t active) {
  const HourlyLoadSeries s("c", "2015", std::vector<double>(8760, 2.0));
  ActivationSchedule sched{"2015", {}, 1.0};
  for (std::size_t t = 0; t < active; ++t) sched.active_hours.push_back(t);
  DynamicContext ctx{{sched}, {build_segment_stack({5, 8}, 2.0, 10)}};
  return {ScenarioSet({{s, 1.0}}), std::move(ctx)};
}
}  // namespace

TEST(OptimizeDynamic, OneActiveHourNotWorthCapacity) {
  auto [set, ctx] = flat_with_activations(1);
  EXPECT_EQ(optimize_dynamic(set, sample_dynamic(), ctx).decision.level, 0.0);
  auto f = [&](double x) { return expected_cost(set, sample_dynamic(), x, &ctx).total_welfare; };
  EXPECT_EQ(fixtures::grid_minimum(f, 2.0, 2e-3).level, 0.0);
}

TEST(OptimizeDynamic, ElevenTopSegmentHoursJustifyCapacity) {
  // Saving per kW at x=0 is hours * (5 - 0.005) against 54 EUR/kW.
  {
    auto [set, ctx] = flat_with_activations(10);
    EXPECT_EQ(optimize_dynamic(set, sample_dynamic(), ctx).decision.level, 0.0);
  }
  auto [set, ctx] = flat_with_activations(11);
  const auto r = optimize_dynamic(set, sample_dynamic(), ctx);
  EXPECT_GT(r.decision.level, 0.0);
  auto f = [&](double x) { return expected_cost(set, sample_dynamic(), x, &ctx).total_welfare; };
  const auto g = fixtures::grid_minimum(f, 2.0, 2e-3);
  EXPECT_GT(g.level, 0.0);
  EXPECT_LE(r.expected_breakdown.total_welfare, g.cost * (1 + 1e-9));
}

TEST(OptimizeDynamic, BisectionMatchesExhaustiveScan) {
  std::mt19937_64 rng(32);
  OptimizerOptions full;
  full.exhaustive = true;
  for (int trial = 0; trial < 40; ++trial) {
    const auto set = fixtures::random_scenario_set(rng, 150, 1 + trial % 3);
    const auto ctx = fixtures::random_context(rng, set, 0.05 + 0.01 * (trial % 10), 1 + trial % 7);
    const auto a = optimize_dynamic(set, sample_dynamic(), ctx);
    const auto b = optimize_dynamic(set, sample_dynamic(), ctx, full);
    EXPECT_NEAR(a.expected_breakdown.total_welfare, b.expected_breakdown.total_welfare,
                1e-9 * b.expected_breakdown.total_welfare);
  }
}

TEST(OptimizeDynamic, MinimumLevel) {
  auto [set, ctx] = flat_with_activations(1);
  OptimizerOptions opts;
  opts.min_level = 1.25;
  EXPECT_EQ(optimize_dynamic(set, sample_dynamic(), ctx, opts).decision.level, 1.25);
}

TEST(OptimizeDynamic, Mismatch) {
  auto [set, ctx] = flat_with_activations(1);
  ctx.schedules[0].year_label = "1999";
  EXPECT_THROW(optimize_dynamic(set, sample_dynamic(), ctx), ScenarioMismatch);
  ctx.schedules.clear();
  EXPECT_THROW(optimize_dynamic(set, sample_dynamic(), ctx), ScenarioMismatch);
}

TEST(Reactive, IdenticalYearsMatchDeterministic) {
  std::mt19937_64 rng(41);
  const auto loads = fixtures::random_loads(rng, 2000);
  const HourlyLoadSeries y1("c", "2014", loads), y2("c", "2015", loads);
  const auto react = reactive_level(y1, sample_static());
  const auto det = optimize_deterministic(y2, sample_static());
  EXPECT_EQ(std::get<policy::Reactive>(react.policy).source_year_label, "2014");
  EXPECT_EQ(cost_static_cs(y2, sample_static(), react.level).total_monetary,
            det.expected_breakdown.total_monetary);
  const auto cands = static_candidates(ScenarioSet({{y1, 1.0}}));
  EXPECT_TRUE(std::find(cands.begin(), cands.end(), react.level) != cands.end());
}

TEST(Reactive, QuietYearLeavesNextYearExposed) {
  const std::vector<double> loads(8760, 2.0);
  const HourlyLoadSeries prev("c", "2014", loads), cur("c", "2015", loads);
  const auto stack = build_segment_stack({5, 8}, 2.0, 10);
  const ActivationSchedule quiet{"2014", {}, 1.0};
  ActivationSchedule busy{"2015", {}, 1.0};
  for (std::size_t t = 0; t < 150; ++t) busy.active_hours.push_back(t);
  const auto react = reactive_level(prev, sample_dynamic(), quiet, stack);
  EXPECT_EQ(react.level, 0.0);
  const auto hit = cost_dynamic_cs(cur, sample_dynamic(), react.level, busy, stack);
  EXPECT_NEAR(hit.discomfort, 150.0 * discomfort_cost(stack, 2.0), 1e-9);
  const auto det = optimize_deterministic(cur, sample_dynamic(), busy, stack);
  EXPECT_GT(hit.total_welfare, det.expected_breakdown.total_welfare);
}

TEST(OptimizerProperties, BreakpointSearchBeatsDenseGrid) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const auto set = fixtures::random_scenario_set(rng, 200, 1 + trial % 3);
    double peak = 0.0;
    for (const auto& sc : set.scenarios()) peak = std::max(peak, sc.series.peak());
    {
      const auto r = optimize_static(set, sample_static());
      auto f = [&](double x) { return fixtures::static_cost_by_hand(set, sample_static(), x); };
      const auto g = fixtures::grid_minimum(f, peak, 1e-3 * peak);
      EXPECT_LE(r.expected_breakdown.total_monetary, g.cost * (1 + 1e-6));
    }
    {
      const auto ctx = fixtures::random_context(rng, set, 0.1, 10);
      const auto r = optimize_dynamic(set, sample_dynamic(), ctx);
      auto f = [&](double x) {
        return expected_cost(set, sample_dynamic(), x, &ctx).total_welfare;
      };
      const auto g = fixtures::grid_minimum(f, peak, 1e-3 * peak);
      EXPECT_LE(r.expected_breakdown.total_welfare, g.cost * (1 + 1e-6));
    }
  }
}

TEST(OptimizerProperties, StochasticBeatsEveryDeterministicLevel) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const auto set = fixtures::random_scenario_set(rng, 400, 3);
    const auto ctx = fixtures::random_context(rng, set, 0.08, 10);
    const auto st = optimize_static(set, sample_static());
    const auto dy = optimize_dynamic(set, sample_dynamic(), ctx);
    for (std::size_t s = 0; s < set.size(); ++s) {
      const double xs = optimize_deterministic(set[s].series, sample_static()).decision.level;
      EXPECT_LE(st.expected_breakdown.total_welfare,
                expected_cost(set, sample_static(), xs).total_welfare + 1e-9);
      const double xd = optimize_deterministic(set[s].series, sample_dynamic(),
                                               ctx.schedules[s], ctx.stacks[s])
                            .decision.level;
      EXPECT_LE(dy.expected_breakdown.total_welfare,
                expected_cost(set, sample_dynamic(), xd, &ctx).total_welfare + 1e-9);
    }
  }
}

TEST(OptimizerProperties, ObjectivesConvexAlongCandidates) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto set = fixtures::random_scenario_set(rng, 120, 1 + trial % 3);
    const auto ctx = fixtures::random_context(rng, set, 0.15, 1 + trial % 10);
    std::vector<double> fs;
    const auto sc = static_candidates(set);
    for (double x : sc) fs.push_back(expected_cost(set, sample_static(), x).total_monetary);
    EXPECT_TRUE(fixtures::slopes_non_decreasing(sc, fs));
    fs.clear();
    const auto dc = dynamic_candidates(set, ctx);
    for (double x : dc) fs.push_back(expected_cost(set, sample_dynamic(), x, &ctx).total_welfare);
    EXPECT_TRUE(fixtures::slopes_non_decreasing(dc, fs));
  }
}
