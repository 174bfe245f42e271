#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "farm/agents/environment.hpp"
#include "farm/calendar.hpp"
#include "farm/errors.hpp"
#include "farm/forecast.hpp"
#include "farm/rng.hpp"

using namespace farm;

namespace {

// Records the largest index read through at().
class TracingView : public SeriesView {
 public:
  using SeriesView::SeriesView;
  double at(std::size_t i) const override {
    max_index = std::max(max_index, i);
    ++reads;
    return SeriesView::at(i);
  }
  mutable std::size_t max_index = 0;
  mutable std::size_t reads = 0;
};

const TimeSeriesYear& year() {
  static const TimeSeriesYear y = generate_synthetic(SyntheticSpec{});
  return y;
}

double sorted_percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (pos - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace

TEST(SeasonalNaive, Identity) {
  std::vector<double> ramp(200);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  EXPECT_EQ(seasonal_naive_p50(ramp, 100), 76.0);
  EXPECT_EQ(seasonal_naive_p50(ramp, 5), 5.0);
  const std::vector<double> flat(100, 3.25);
  for (std::size_t t = 0; t < flat.size(); ++t) EXPECT_EQ(seasonal_naive_p50(flat, t), 3.25);
  const auto load = year().load();
  for (std::size_t t = 24; t < load.size(); ++t) ASSERT_EQ(seasonal_naive_p50(load, t), load[t - 24]);
}

TEST(Percentile, LinearInterpolation) {
  std::vector<double> v;
  for (int i = -10; i <= 10; ++i) v.push_back(i);
  EXPECT_DOUBLE_EQ(empirical_percentile(v, 0.10), -8.0);
  EXPECT_DOUBLE_EQ(empirical_percentile(v, 0.90), 8.0);
  EXPECT_DOUBLE_EQ(empirical_percentile({1.0, 2.0}, 0.5), 1.5);
  EXPECT_THROW(empirical_percentile({}, 0.5), DegenerateError);
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> s(1 + rng.below(50));
    for (auto& x : s) x = rng.normal();
    const double q = rng.uniform();
    EXPECT_NEAR(empirical_percentile(s, q), sorted_percentile(s, q), 1e-12);
  }
}

TEST(Bands, ConstantSeriesHasZeroWidth) {
  const std::vector<double> flat(kHoursPerYear, 7.0);
  const auto bands = fit_bands(flat, SplitSpec::heater_default());
  for (int m : {1, 7})
    for (int h = 0; h < 24; ++h) {
      EXPECT_EQ(bands.lower(m, h), 0.0);
      EXPECT_EQ(bands.upper(m, h), 0.0);
    }
}

TEST(Bands, RampResidualIs24) {
  std::vector<double> ramp(kHoursPerYear);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  const auto bands = fit_bands(ramp, SplitSpec::heater_default());
  EXPECT_EQ(bands.lower(1, 3), 24.0);
  EXPECT_EQ(bands.upper(7, 20), 24.0);
}

TEST(Bands, BucketMatchesSortOracle) {
  // January hour 9 gets residuals from a known list; everything else is flat.
  std::vector<double> series(kHoursPerYear, 0.0);
  std::vector<double> wanted;
  for (int i = 0; i < 30; ++i) wanted.push_back(static_cast<double>((i * 7) % 21 - 10));
  double level = 0.0;
  for (std::size_t d = 1; d < 31; ++d) {
    level += wanted[d - 1];
    series[d * 24 + 9] = level;
  }
  // Keep later days of January hour 9 consistent with the last level.
  for (std::size_t i = 31 * 24; i < kHoursPerYear; i += 24) series[i + 9] = level;
  const auto res = bucket_residuals(series, 1, 9);
  ASSERT_EQ(res, wanted);
  const auto bands = fit_bands(series, SplitSpec::heater_default());
  EXPECT_DOUBLE_EQ(bands.lower(1, 9), sorted_percentile(wanted, 0.1));
  EXPECT_DOUBLE_EQ(bands.upper(1, 9), sorted_percentile(wanted, 0.9));
}

TEST(Bands, ResidualsOnlyFromTrainingMonths) {
  auto load = year().load();
  const auto before = fit_bands(load, SplitSpec::heater_default());
  for (std::size_t i = month_start_index(3); i < month_start_index(4); ++i) load[i] *= 5.0;
  const auto after = fit_bands(load, SplitSpec::heater_default());
  EXPECT_EQ(before.q10, after.q10);
  EXPECT_EQ(before.q90, after.q90);
  EXPECT_EQ(after.fitted_on, (std::set<int>{1, 7}));
}

TEST(Bands, UncoveredTrainingMonthRejected) {
  const std::vector<double> partial(1000, 1.0);
  EXPECT_THROW(fit_bands(partial, SplitSpec::heater_default()), ConfigError);
}

TEST(Bands, NearestMonthFallback) {
  ResidualBandTable t;
  t.fitted_on = {1, 7};
  EXPECT_EQ(t.resolve_month(1), 1);
  EXPECT_EQ(t.resolve_month(2), 1);
  EXPECT_EQ(t.resolve_month(12), 1);
  EXPECT_EQ(t.resolve_month(6), 7);
  EXPECT_EQ(t.resolve_month(4), 1);   // tie at distance 3 -> earlier month
  EXPECT_EQ(t.resolve_month(10), 7);  // tie at distance 3 -> earlier month
}

TEST(Bands, CoverageWithinTenPercentBands) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    const auto y = generate_synthetic(spec);
    for (const auto& series : {y.load(), y.pv()}) {
      const auto bands = fit_bands(series, SplitSpec::heater_default());
      for (const auto& c : band_coverage(series, bands)) {
        if (c.n < 20 || c.point_mass) continue;
        EXPECT_GE(c.below_q10, 0.05) << c.month << "/" << c.hour;
        EXPECT_LE(c.below_q10, 0.15) << c.month << "/" << c.hour;
        EXPECT_GE(c.above_q90, 0.05) << c.month << "/" << c.hour;
        EXPECT_LE(c.above_q90, 0.15) << c.month << "/" << c.hour;
      }
    }
  }
}

TEST(NormalizerTest, DependsOnlyOnTrainingMonths) {
  auto load = year().load();
  auto pv = year().pv();
  const auto a = Normalizer::fit(load, pv, {1, 7});
  for (std::size_t i = month_start_index(9); i < month_start_index(10); ++i) {
    load[i] += 100.0;
    pv[i] = 0.0;
  }
  const auto b = Normalizer::fit(load, pv, {1, 7});
  EXPECT_EQ(a.demand.mean, b.demand.mean);
  EXPECT_EQ(a.demand.std, b.demand.std);
  EXPECT_EQ(a.pv.mean, b.pv.mean);
  EXPECT_EQ(a.pv.std, b.pv.std);
}

TEST(NormalizerTest, ClipsAtFiveSigma) {
  Normalizer n;
  n.demand = {10.0, 2.0};
  EXPECT_EQ(n.normalize_demand(1000.0), 5.0);
  EXPECT_EQ(n.normalize_demand(-1000.0), -5.0);
  EXPECT_DOUBLE_EQ(n.normalize_demand(12.0), 1.0);
  const std::vector<double> flat(kHoursPerYear, 3.0);
  const auto f = Normalizer::fit(flat, flat, {1});
  EXPECT_GT(f.demand.std, 0.0);
}

TEST(Block, LookAheadHygiene) {
  const auto load = wrap_day(year().load());
  const auto pv = wrap_day(year().pv());
  const auto split = SplitSpec::heater_default();
  const auto bd = fit_bands(year().load(), split);
  const auto bp = fit_bands(year().pv(), split);
  const auto norm = Normalizer::fit(year().load(), year().pv(), split.train_months);
  for (std::size_t t : {0u, 5u, 23u, 24u, 100u, 4000u, 8759u}) {
    TracingView dv(load), pvv(pv);
    make_block(dv, pvv, t, bd, bp, norm, ForecastMode::all);
    EXPECT_LE(dv.max_index, t) << t;
    EXPECT_LE(pvv.max_index, t) << t;
    EXPECT_EQ(dv.reads, 24u);
  }
}

TEST(Block, SizesAndClipping) {
  auto load = year().load();
  load[6000] = 1e6;  // spike in a test month
  const auto split = SplitSpec::heater_default();
  const auto bd = fit_bands(load, split);
  const auto bp = fit_bands(year().pv(), split);
  const auto norm = Normalizer::fit(load, year().pv(), split.train_months);
  const auto pv = year().pv();
  const SeriesView dv(load), pvv(pv);
  const auto one = make_block(dv, pvv, 6000, bd, bp, norm, ForecastMode::one);
  EXPECT_EQ(one.values.size(), 48u);
  const auto all = make_block(dv, pvv, 6000, bd, bp, norm, ForecastMode::all);
  EXPECT_EQ(all.values.size(), 144u);
  bool saw_cap = false;
  for (std::size_t t = 5990; t < 6030; ++t)
    for (double v : make_block(dv, pvv, t, bd, bp, norm, ForecastMode::all).values) {
      ASSERT_LE(std::abs(v), 5.0);
      saw_cap = saw_cap || v == 5.0;
    }
  EXPECT_TRUE(saw_cap);
}

TEST(Block, ConstantSeriesChannelsAgree) {
  const std::vector<double> flat(kHoursPerYear, 4.0);
  const std::vector<double> pv(kHoursPerYear, 2.0);
  const auto split = SplitSpec::heater_default();
  const auto bd = fit_bands(flat, split);
  const auto bp = fit_bands(pv, split);
  Normalizer norm;
  norm.demand = {3.0, 0.5};
  norm.pv = {1.0, 2.0};
  const auto b = make_block(SeriesView(flat), SeriesView(pv), 300, bd, bp, norm, ForecastMode::all);
  for (std::size_t lead = 0; lead < 24; ++lead) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(b.at(lead, c), 2.0);
    for (std::size_t c = 3; c < 6; ++c) EXPECT_DOUBLE_EQ(b.at(lead, c), 0.5);
  }
}

TEST(Block, HorizonPastEnd) {
  const auto load = year().load();
  const auto pv = year().pv();
  const auto split = SplitSpec::heater_default();
  const auto bd = fit_bands(load, split);
  const auto bp = fit_bands(pv, split);
  const auto norm = Normalizer::fit(load, pv, split.train_months);
  EXPECT_THROW(make_block(SeriesView(load), SeriesView(pv), load.size() - 10, bd, bp, norm,
                          ForecastMode::one),
               HorizonError);
}

TEST(Block, QuantileOrdering) {
  const auto load = wrap_day(year().load());
  const auto pv = wrap_day(year().pv());
  const auto split = SplitSpec::heater_default();
  const auto bd = fit_bands(year().load(), split);
  const auto bp = fit_bands(year().pv(), split);
  const SeriesView dv(load), pvv(pv);
  for (std::size_t t = 0; t < kHoursPerYear; t += 7) {
    for (const auto& q : forecast_quantiles(dv, pvv, t, bd, bp)) {
      ASSERT_LE(q.demand_p10, q.demand_p90);
      ASSERT_LE(q.pv_p10, q.pv_p90);
      ASSERT_LE(q.demand_p10, q.demand_p50);
      ASSERT_LE(q.demand_p50, q.demand_p90);
      ASSERT_LE(q.pv_p10, q.pv_p50);
      ASSERT_LE(q.pv_p50, q.pv_p90);
    }
  }
}

TEST(Block, ModeParsing) {
  EXPECT_EQ(parse_forecast_mode("one"), ForecastMode::one);
  EXPECT_EQ(parse_forecast_mode("all"), ForecastMode::all);
  EXPECT_THROW(parse_forecast_mode("some"), ConfigError);
  EXPECT_EQ(forecast_channels(ForecastMode::one), 2u);
  EXPECT_EQ(forecast_channels(ForecastMode::all), 6u);
}
