#include <gtest/gtest.h>

#include <cmath>

#include "cstariff/vcl.hpp"
#include "support/oracles.hpp"

using namespace cstariff;

namespace {
const VclCurveParams kDefaultCurve{5.0, 8.0};
// 5 (1 - e^-4) / (1 - e^-8), evaluated independently in high precision.
constexpr double kHalfCut = 4.910068950189542;
}  // namespace

TEST(VclMarginal, Boundaries) {
  EXPECT_EQ(vcl_marginal(kDefaultCurve, 0.0), 0.0);
  EXPECT_EQ(vcl_marginal(kDefaultCurve, 1.0), 5.0);
  EXPECT_NEAR(vcl_marginal(kDefaultCurve, 0.5), kHalfCut, 1e-12);
}

TEST(VclMarginal, MatchesDirectFormulaAndIsMonotone) {
  double prev = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double f = k / 100.0;
    const double v = vcl_marginal(kDefaultCurve, f);
    EXPECT_NEAR(v, 5.0 * (1.0 - std::exp(-8.0 * f)) / (1.0 - std::exp(-8.0)), 1e-12);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(VclMarginal, OutOfRange) {
  EXPECT_THROW(vcl_marginal(kDefaultCurve, -0.01), DomainError);
  EXPECT_THROW(vcl_marginal(kDefaultCurve, 1.01), DomainError);
  EXPECT_THROW(vcl_marginal({0.0, 8.0}, 0.5), DomainError);
  EXPECT_THROW(vcl_marginal({5.0, 0.0}, 0.5), DomainError);
}

TEST(SegmentStack, SingleSegment) {
  const auto s = build_segment_stack(kDefaultCurve, 4.0, 1);
  ASSERT_EQ(s.segment_count(), 1u);
  EXPECT_DOUBLE_EQ(s.segments()[0].width_kw, 4.0);
  EXPECT_DOUBLE_EQ(s.segments()[0].marginal_cost, 5.0);
}

TEST(SegmentStack, TwoSegmentsAtRightEndpoints) {
  const auto s = build_segment_stack(kDefaultCurve, 2.0, 2);
  ASSERT_EQ(s.segment_count(), 2u);
  EXPECT_DOUBLE_EQ(s.segments()[0].width_kw, 1.0);
  EXPECT_DOUBLE_EQ(s.segments()[1].width_kw, 1.0);
  EXPECT_NEAR(s.segments()[0].marginal_cost, kHalfCut, 1e-12);
  EXPECT_DOUBLE_EQ(s.segments()[1].marginal_cost, 5.0);
}

TEST(SegmentStack, InvariantsForManySizes) {
  for (int j : {1, 2, 3, 10, 37, 100}) {
    for (double peak : {0.5, 3.0, 12.0}) {
      const auto s = build_segment_stack(kDefaultCurve, peak, j);
      double width = 0.0;
      for (std::size_t k = 0; k < s.segment_count(); ++k) {
        width += s.segments()[k].width_kw;
        if (k > 0) {
          EXPECT_GT(s.segments()[k].marginal_cost, s.segments()[k - 1].marginal_cost);
        }
      }
      EXPECT_NEAR(width, peak, 1e-9 * peak);
      EXPECT_LE(s.segments().back().marginal_cost, 5.0);
    }
  }
}

TEST(SegmentStack, CostsDependOnlyOnFractionNotPeak) {
  // A 5 kW-peak consumer cut 1 kW and a 10 kW-peak consumer cut 2 kW pay the
  // same per-kWh schedule.
  const auto a = build_segment_stack(kDefaultCurve, 5.0, 10);
  const auto b = build_segment_stack(kDefaultCurve, 10.0, 10);
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_EQ(a.segments()[k].marginal_cost, b.segments()[k].marginal_cost);
  }
  EXPECT_NEAR(discomfort_cost(b, 2.0), 2.0 * discomfort_cost(a, 1.0), 1e-12);
}

TEST(SegmentStack, Errors) {
  EXPECT_THROW(build_segment_stack(kDefaultCurve, 0.0, 10), DegenerateProfile);
  EXPECT_THROW(build_segment_stack(kDefaultCurve, 2.0, 0), DomainError);
  EXPECT_THROW(VclSegmentStack(2.0, {{1.0, 2.0}, {1.0, 2.0}}), DomainError);
  EXPECT_THROW(VclSegmentStack(2.0, {{1.0, 2.0}, {0.5, 3.0}}), DomainError);
}

TEST(DiscomfortCost, GreedyFill) {
  const auto s = build_segment_stack(kDefaultCurve, 2.0, 2);
  EXPECT_EQ(discomfort_cost(s, 0.0), 0.0);
  EXPECT_NEAR(discomfort_cost(s, 1.0), kHalfCut, 1e-12);
  EXPECT_NEAR(discomfort_cost(s, 1.5), kHalfCut + 0.5 * 5.0, 1e-12);
  EXPECT_NEAR(discomfort_cost(s, 2.0), kHalfCut + 5.0, 1e-12);
  EXPECT_THROW(discomfort_cost(s, 2.1), DomainError);
  EXPECT_THROW(discomfort_cost(s, -0.1), DomainError);
}

TEST(DiscomfortCost, ConvexPiecewiseLinear) {
  const auto s = build_segment_stack(kDefaultCurve, 3.0, 7);
  for (int i = 0; i < 300; ++i) {
    const double a = 0.01 * i, b = a + 0.003, c = b + 0.004;
    if (c > 3.0) break;
    const double ab = (discomfort_cost(s, b) - discomfort_cost(s, a)) / (b - a);
    const double bc = (discomfort_cost(s, c) - discomfort_cost(s, b)) / (c - b);
    EXPECT_LE(ab, bc + 1e-9);
  }
}

TEST(DiscomfortCost, ConvergesToContinuum) {
  const double peak = 4.0;
  const auto fine = build_segment_stack(kDefaultCurve, peak, 1000);
  const auto coarse = build_segment_stack(kDefaultCurve, peak, 100);
  for (double f : {0.25, 0.5, 1.0}) {
    const double exact = fixtures::continuum_discomfort(5.0, 8.0, peak, f);
    const double j1000 = discomfort_cost(fine, f * peak);
    const double j100 = discomfort_cost(coarse, f * peak);
    // Right-endpoint pricing over-estimates the area under the curve.
    EXPECT_GE(j100, exact);
    EXPECT_GE(j1000, exact);
    // The upper sum exceeds the area by at most vcl(f) * peak / J.
    const double v = vcl_marginal(kDefaultCurve, f);
    EXPECT_LE(j100 - exact, v * peak / 100.0);
    EXPECT_LE(j1000 - exact, v * peak / 1000.0);
    EXPECT_LT(j1000 - exact, (j100 - exact) / 5.0);
  }
}

TEST(DiscomfortCost, DefaultSegmentCountCloseToContinuum) {
  const auto s = build_segment_stack(kDefaultCurve, 1.0, kDefaultVclSegments);
  const double exact = fixtures::continuum_discomfort(5.0, 8.0, 1.0, 1.0);
  EXPECT_LT((discomfort_cost(s, 1.0) - exact) / exact, 0.06);
}
