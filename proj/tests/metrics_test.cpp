#include <gtest/gtest.h>

#include <cmath>

#include "farm/calendar.hpp"
#include "farm/errors.hpp"
#include "farm/metrics.hpp"
#include "farm/rng.hpp"
#include "oracles.hpp"

using namespace farm;

namespace {

HourlyRecord hour_at(std::size_t index, double import, double price) {
  HourlyRecord h;
  h.index = index;
  h.month = month_of_index(index);
  h.hour = static_cast<int>(index % 24);
  h.grid_import_kwh = import;
  h.price = price;
  h.cost = import * price;
  return h;
}

PeakProfile flat(double kw) {
  PeakProfile p;
  p.kw.fill(kw);
  return p;
}

}  // namespace

TEST(Cost, SumsPriceTimesImport) {
  const std::vector<HourlyRecord> hours{hour_at(0, 2, 0.1), hour_at(1, 3, 0.2), hour_at(2, 1, 0.3)};
  EXPECT_NEAR(total_cost(hours), 1.10, 1e-12);
  EXPECT_DOUBLE_EQ(total_import(hours), 6.0);
}

TEST(Peak, ReductionExample) {
  auto base = flat(2.0);
  base.kw[18] = 8.0;
  auto sched = flat(2.0);
  sched.kw[7] = 6.9;
  EXPECT_NEAR(peak_reduction(base, sched), 0.1375, 1e-12);
}

TEST(Peak, ReductionIsScaleInvariant) {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    PeakProfile a, b, as, bs;
    const double k = rng.uniform(0.1, 50);
    for (std::size_t h = 0; h < 24; ++h) {
      a.kw[h] = rng.uniform(0.1, 10);
      b.kw[h] = rng.uniform(0.1, 10);
      as.kw[h] = k * a.kw[h];
      bs.kw[h] = k * b.kw[h];
    }
    EXPECT_NEAR(peak_reduction(a, b), peak_reduction(as, bs), 1e-12);
  }
}

TEST(Peak, DegenerateBaseRejected) {
  EXPECT_THROW(peak_reduction(flat(0.0), flat(1.0)), DegenerateError);
}

TEST(Peak, ProfileAveragesByHour) {
  std::vector<HourlyRecord> hours;
  for (std::size_t d = 0; d < 2; ++d)
    for (std::size_t h = 0; h < 24; ++h) hours.push_back(hour_at(d * 24 + h, h == 5 ? 2.0 + d : 1.0, 0.1));
  const auto p = peak_profile(hours);
  EXPECT_DOUBLE_EQ(p.kw[5], 2.5);
  EXPECT_DOUBLE_EQ(p.kw[0], 1.0);
  EXPECT_DOUBLE_EQ(p.peak(), 2.5);
}

TEST(Satisfaction, RateAndAdherence) {
  std::vector<DayLedger> days(100);
  for (std::size_t i = 0; i < days.size(); ++i) {
    days[i].day_index = i;
    days[i].met = i != 17;
    days[i].on_hours_taken = 3;
    days[i].on_hours_in_window = i < 50 ? 3 : 0;
  }
  EXPECT_DOUBLE_EQ(satisfaction_rate(days), 0.99);
  EXPECT_DOUBLE_EQ(window_adherence(days), 0.5);
}

TEST(Monthly, AggregatesFromHours) {
  std::vector<HourlyRecord> hours;
  for (std::size_t i = 0; i < 48; ++i) hours.push_back(hour_at(i, i < 24 ? 1.0 : 3.0, 0.2));
  hours.push_back(hour_at(744, 5.0, 0.1));
  const RunReport r("battery", "rule", 1, hours);
  ASSERT_EQ(r.monthly().size(), 2u);
  EXPECT_EQ(r.monthly()[0].month, 1);
  EXPECT_DOUBLE_EQ(r.monthly()[0].import_kwh, 96.0);
  EXPECT_DOUBLE_EQ(r.monthly()[0].peak_kw, 2.0);
  EXPECT_FALSE(r.monthly()[0].satisfaction);
  EXPECT_EQ(r.monthly()[1].hours, 1u);
}

TEST(Monthly, MismatchedSuppliedRowsRejected) {
  std::vector<HourlyRecord> hours{hour_at(0, 1.0, 0.2), hour_at(1, 2.0, 0.2)};
  auto rows = monthly_aggregates(hours, {});
  EXPECT_NO_THROW(RunReport("battery", "rule", 1, hours, {}, rows));
  rows[0].import_kwh += 0.5;
  EXPECT_THROW(RunReport("battery", "rule", 1, hours, {}, rows), ValidationError);
  rows[0].month = 2;
  EXPECT_THROW(RunReport("battery", "rule", 1, hours, {}, std::vector<MonthlyAggregate>{}), ValidationError);
}

TEST(Monthly, SatisfactionPerMonth) {
  std::vector<HourlyRecord> hours;
  std::vector<DayLedger> days;
  for (std::size_t d = 0; d < 4; ++d) {
    for (std::size_t h = 0; h < 24; ++h) hours.push_back(hour_at(d * 24 + h, 1.0, 0.1));
    DayLedger l;
    l.day_index = d;
    l.met = d % 2 == 0;
    days.push_back(l);
  }
  const RunReport r("heater", "ppo", 2, hours, days);
  ASSERT_TRUE(r.monthly()[0].satisfaction);
  EXPECT_DOUBLE_EQ(*r.monthly()[0].satisfaction, 0.5);
}

TEST(Wilcoxon, AllPositiveTen) {
  std::vector<double> d;
  for (int i = 1; i <= 10; ++i) d.push_back(i * 0.5);
  const auto r = wilcoxon_signed_rank(d);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.n, 10u);
  EXPECT_DOUBLE_EQ(r.w_plus, 55.0);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 0.001953125, 1e-15);
}

TEST(Wilcoxon, SymmetricPairIsOne) {
  EXPECT_DOUBLE_EQ(wilcoxon_signed_rank({1.0, -1.0}).p_value, 1.0);
}

TEST(Wilcoxon, ZerosDroppedAndAllZeroDegenerate) {
  const auto r = wilcoxon_signed_rank({0.0, 2.0, 0.0, 3.0});
  EXPECT_EQ(r.n, 2u);
  EXPECT_DOUBLE_EQ(r.p_value, 0.5);
  EXPECT_THROW(wilcoxon_signed_rank({0.0, 0.0}), DegenerateError);
  EXPECT_THROW(wilcoxon_signed_rank({}), DegenerateError);
}

TEST(Wilcoxon, MatchesExhaustiveOracle) {
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) {
      // Rounded values so ties occur regularly.
      double v = std::round(rng.normal() * 3.0) / 2.0;
      if (v == 0.0) v = 0.5;
      d.push_back(v);
    }
    const auto r = wilcoxon_signed_rank(d);
    EXPECT_NEAR(r.p_value, oracle::wilcoxon_exhaustive(d), 1e-12) << trial;
    std::vector<double> neg;
    for (double v : d) neg.push_back(-v);
    EXPECT_NEAR(wilcoxon_signed_rank(neg).p_value, r.p_value, 1e-12);
    EXPECT_DOUBLE_EQ(r.w_plus + r.w_minus, n * (n + 1) / 2.0);
  }
}

TEST(Wilcoxon, NormalApproximationForLargeSamples) {
  Rng rng(12);
  std::vector<double> d;
  for (int i = 0; i < 40; ++i) d.push_back(rng.normal() + 0.8);
  const auto r = wilcoxon_signed_rank(d);
  EXPECT_FALSE(r.exact);
  EXPECT_LT(r.p_value, 0.01);
  std::vector<double> null;
  for (int i = 0; i < 40; ++i) null.push_back(i % 2 ? (i + 1.0) : -(i + 0.5));
  EXPECT_GT(wilcoxon_signed_rank(null).p_value, 0.2);
}

TEST(Median, OddAndEven) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
}
