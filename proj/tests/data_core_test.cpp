#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "farm/calendar.hpp"
#include "farm/errors.hpp"
#include "farm/timeseries.hpp"

using namespace farm;

namespace {

const TimeSeriesYear& default_year() {
  static const TimeSeriesYear year = generate_synthetic(SyntheticSpec{});
  return year;
}

std::string to_csv(const TimeSeriesYear& y) {
  std::ostringstream out;
  write_csv(y, out);
  return out.str();
}

// Replaces data line `row` (0-based, header excluded) of a CSV text.
std::string edit_row(const std::string& csv, std::size_t row, const std::string& replacement,
                     bool erase = false) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  std::getline(in, line);
  out << line << '\n';
  for (std::size_t i = 0; std::getline(in, line); ++i) {
    if (i == row) {
      if (!erase) out << replacement << '\n';
      continue;
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

TEST(Calendar, MonthBoundaries) {
  EXPECT_EQ(month_of_index(0), 1);
  EXPECT_EQ(month_of_index(743), 1);
  EXPECT_EQ(month_of_index(744), 2);
  EXPECT_EQ(month_of_index(kHoursPerYear - 1), 12);
  EXPECT_EQ(month_start_index(2), 744u);
  EXPECT_EQ(month_hours(2), 672u);
  std::size_t total = 0;
  for (int m = 1; m <= 12; ++m) total += month_hours(m);
  EXPECT_EQ(total, kHoursPerYear);
}

TEST(Calendar, RejectsImpossibleDates) {
  std::size_t idx = 0;
  EXPECT_FALSE(calendar_index(2, 29, 0, idx));
  EXPECT_FALSE(calendar_index(4, 31, 0, idx));
  EXPECT_FALSE(calendar_index(1, 1, 24, idx));
  ASSERT_TRUE(calendar_index(12, 31, 23, idx));
  EXPECT_EQ(idx, kHoursPerYear - 1);
}

TEST(Calendar, CircularMonthDistance) {
  EXPECT_EQ(circular_month_distance(1, 12), 1);
  EXPECT_EQ(circular_month_distance(1, 7), 6);
  EXPECT_EQ(circular_month_distance(3, 5), 2);
}

TEST(Synthetic, DeterministicForSeed) {
  SyntheticSpec spec;
  spec.seed = 42;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].load_kw), std::bit_cast<std::uint64_t>(b[i].load_kw));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i].pv_kw), std::bit_cast<std::uint64_t>(b[i].pv_kw));
  }
  spec.seed = 43;
  EXPECT_FALSE(generate_synthetic(spec) == a);
}

TEST(Synthetic, NoPvAtMidnight) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SyntheticSpec spec;
    spec.seed = seed;
    const auto y = generate_synthetic(spec);
    for (std::size_t d = 0; d < kDaysPerYear; ++d) EXPECT_EQ(y[d * 24].pv_kw, 0.0);
  }
}

TEST(Synthetic, HourMatchesIndex) {
  const auto& y = default_year();
  ASSERT_EQ(y.size(), kHoursPerYear);
  for (std::size_t i = 0; i < y.size(); ++i) {
    ASSERT_EQ(y[i].index, i);
    ASSERT_EQ(y[i].hour, static_cast<int>(i % 24));
    ASSERT_EQ(y[i].month, month_of_index(i));
  }
}

TEST(Synthetic, AnnualPvMatchesAnalyticIntegral) {
  // Midday-sampled half sine over the day length integrates to 2 L / pi per
  // day; the mean cloud factor is 1 - depth / 2.
  const SyntheticSpec spec;
  double analytic = 0.0;
  for (int m = 1; m <= 12; ++m) {
    const double c = std::cos(2.0 * std::numbers::pi * (m - 6.5) / 12.0);
    const double season = 0.45 + 0.4 * c;
    const double length = 12.0 + 4.0 * c;
    analytic += kDaysInMonth[static_cast<std::size_t>(m - 1)] * spec.pv_peak_kw * season *
                (1.0 - spec.cloud_depth / 2.0) * 2.0 * length / std::numbers::pi;
  }
  double generated = 0.0;
  for (const auto& r : default_year().records()) generated += r.pv_kw;
  EXPECT_NEAR(generated / analytic, 1.0, 0.05);
  EXPECT_NEAR(generated / (spec.pv_peak_kw * 1100.0), 1.0, 0.20);
}

TEST(Synthetic, SummerPvExceedsWinter) {
  double jan = 0.0, jul = 0.0;
  for (const auto& r : default_year().records()) {
    if (r.month == 1) jan += r.pv_kw;
    if (r.month == 7) jul += r.pv_kw;
  }
  EXPECT_GT(jul, 2.0 * jan);
}

TEST(Synthetic, TariffLevels) {
  const auto& y = default_year();
  EXPECT_DOUBLE_EQ(y[3].price, 0.10);
  EXPECT_DOUBLE_EQ(y[12].price, 0.20);
  EXPECT_DOUBLE_EQ(y[18].price, 0.30);
  EXPECT_DOUBLE_EQ(y[21].price, 0.20);
}

TEST(Synthetic, InvalidSpecRejected) {
  SyntheticSpec spec;
  spec.base_load_kw = -1.0;
  EXPECT_THROW(spec.validate(), ConfigError);
  SyntheticSpec gap;
  gap.tariff_levels = {{{{0, 12}}, 0.1}};
  EXPECT_THROW(gap.validate(), ConfigError);
  SyntheticSpec overlap;
  overlap.tariff_levels = {{{{0, 24}}, 0.1}, {{{5, 6}}, 0.2}};
  EXPECT_THROW(overlap.validate(), ConfigError);
}

TEST(Csv, RoundTripIsExact) {
  const auto& y = default_year();
  std::istringstream in(to_csv(y));
  const auto back = parse_csv(in, {DataSource::Kind::csv, 0, "mem"});
  EXPECT_TRUE(back == y);
  EXPECT_EQ(back.source().kind, DataSource::Kind::csv);
  EXPECT_EQ(to_csv(back), to_csv(y));
}

TEST(Csv, RoundTripOverSeveralSeeds) {
  for (std::uint64_t seed = 10; seed < 13; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.noise_std = 0.2;
    const auto y = generate_synthetic(spec);
    std::istringstream in(to_csv(y));
    EXPECT_TRUE(parse_csv(in, {}) == y);
  }
}

TEST(Csv, MissingHourReportsIndex) {
  const std::string csv = edit_row(to_csv(default_year()), 500, "", true);
  std::istringstream in(csv);
  try {
    parse_csv(in, {});
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.index(), 500u);
  }
}

TEST(Csv, DuplicateHourRejected) {
  const std::string csv = to_csv(default_year());
  std::istringstream lines(csv);
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  std::istringstream in(edit_row(csv, 1, first));
  try {
    parse_csv(in, {});
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(Csv, NegativePvRejected) {
  std::istringstream in(edit_row(to_csv(default_year()), 10, "2023-01-01T10:00:00,8.0,-1,0.2"));
  EXPECT_THROW(parse_csv(in, {}), ValidationError);
}

TEST(Csv, LeapDayRejected) {
  std::istringstream in(edit_row(to_csv(default_year()), 1416, "2024-02-29T00:00:00,8,0,0.1"));
  EXPECT_THROW(parse_csv(in, {}), IngestError);
}

TEST(Csv, TooManyFractionDigitsRejected) {
  std::istringstream in(edit_row(to_csv(default_year()), 3, "2023-01-01T03:00:00,8.1234567,0,0.1"));
  EXPECT_THROW(parse_csv(in, {}), ValidationError);
}

TEST(Csv, BadHeaderRejected) {
  std::istringstream in("time,load,pv,price\n");
  EXPECT_THROW(parse_csv(in, {}), IngestError);
}

TEST(Episodes, JanuaryHas31Days) {
  SplitSpec split{{1}, {2}};
  const auto train = slice_episodes(default_year(), split, Role::train, 24);
  ASSERT_EQ(train.size(), 31u);
  for (const auto& r : train) {
    EXPECT_EQ(r.length(), 24u);
    EXPECT_EQ(month_of_index(r.begin), 1);
    EXPECT_EQ(month_of_index(r.end - 1), 1);
  }
  EXPECT_EQ(slice_episodes(default_year(), split, Role::test, 24).size(), 28u);
}

TEST(Episodes, EmptyRoleRejected) {
  SplitSpec split{{}, {2}};
  EXPECT_THROW(slice_episodes(default_year(), split, Role::train, 24), ConfigError);
}

TEST(Episodes, NeverCrossMonthsAndCoverTestHours) {
  const auto split = SplitSpec::heater_default();
  for (std::size_t len : {24u, 48u, 100u, 168u}) {
    const auto eps = slice_episodes(default_year(), split, Role::test, len);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      EXPECT_EQ(month_of_index(eps[i].begin), month_of_index(eps[i].end - 1));
      EXPECT_TRUE(split.test_months.count(month_of_index(eps[i].begin)));
      if (i > 0) EXPECT_LE(eps[i - 1].end, eps[i].begin);
      covered += eps[i].length();
    }
    if (len == 24) {
      std::size_t test_hours = 0;
      for (int m : split.test_months) test_hours += month_hours(m);
      EXPECT_GE(static_cast<double>(covered), 0.95 * static_cast<double>(test_hours));
    }
  }
}

TEST(Split, DefaultsAreDisjoint) {
  const auto h = SplitSpec::heater_default();
  EXPECT_EQ(h.train_months, (std::set<int>{1, 7}));
  EXPECT_EQ(h.test_months.size(), 10u);
  const auto b = SplitSpec::battery_default();
  EXPECT_EQ(b.train_months, (std::set<int>{1}));
  EXPECT_EQ(b.test_months.size(), 11u);
  SplitSpec bad{{1, 2}, {2, 3}};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Split, MonthListParsing) {
  EXPECT_EQ(parse_month_list("1,7"), (std::set<int>{1, 7}));
  EXPECT_EQ(parse_month_list("2-5"), (std::set<int>{2, 3, 4, 5}));
  EXPECT_THROW(parse_month_list("0"), ConfigError);
  EXPECT_THROW(parse_month_list("5-3"), ConfigError);
  EXPECT_EQ(parse_month_list(format_month_list({2, 3, 4, 9})), (std::set<int>{2, 3, 4, 9}));
}
