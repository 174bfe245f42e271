#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "farm/calendar.hpp"

namespace farm {

/// One hour of farm data. Hourly resolution means kW over a step equals kWh.
struct TimeStepRecord {
  std::size_t index = 0;  // hour of year, [0, 8760)
  int hour = 0;           // [0, 24)
  int month = 1;          // [1, 12]
  double load_kw = 0.0;
  double pv_kw = 0.0;
  double price = 0.0;  // currency per kWh

  friend bool operator==(const TimeStepRecord&, const TimeStepRecord&) = default;
};

struct DataSource {
  enum class Kind { synthetic, csv };
  Kind kind = Kind::synthetic;
  std::uint64_t seed = 0;
  std::string path;
};

/// Exactly 8760 consecutive hourly records of a non-leap year.
class TimeSeriesYear {
 public:
  /// Throws IngestError / ValidationError when the invariants do not hold.
  TimeSeriesYear(std::vector<TimeStepRecord> records, DataSource source);

  std::size_t size() const noexcept { return records_.size(); }
  const TimeStepRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<TimeStepRecord>& records() const noexcept { return records_; }
  const DataSource& source() const noexcept { return source_; }

  std::vector<double> load() const;
  std::vector<double> pv() const;
  std::vector<double> price() const;

  /// Record equality; the provenance tag is ignored.
  friend bool operator==(const TimeSeriesYear& a, const TimeSeriesYear& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<TimeStepRecord> records_;
  DataSource source_;
};

enum class Role { train, test };

struct SplitSpec {
  std::set<int> train_months;
  std::set<int> test_months;

  /// January and July for training, the other ten months for testing.
  static SplitSpec heater_default();
  /// January for training, February..December for testing.
  static SplitSpec battery_default();

  const std::set<int>& months(Role role) const {
    return role == Role::train ? train_months : test_months;
  }
  /// Throws ConfigError on overlapping or out-of-range months.
  void validate() const;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Half-open hour-of-day interval [begin, end).
struct HourRange {
  int begin = 0;
  int end = 0;
  bool contains(int hour) const { return hour >= begin && hour < end; }
};

struct TariffLevel {
  std::vector<HourRange> hours;
  double price = 0.0;
};

/// Parameters of the synthetic dairy-farm year.
///
/// Load:  (base_load_kw + milking_peak_kw inside the milking hours) * (1 + noise_std * N(0,1)).
/// PV:    pv_peak_kw * season(m) * cloud(d) * (1 + noise_std * N(0,1))
///          * max(0, sin(pi * (h + 0.5 - sunrise(m)) / daylength(m)))
///        with c(m) = cos(2 pi (m - 6.5) / 12), season(m) = 0.45 + 0.4 c(m),
///        daylength(m) = 12 + 4 c(m) hours centred on noon, sunrise = 12 - daylength / 2,
///        and a per-day cloud factor cloud(d) = 1 - cloud_depth * U[0, 1).
/// Price: the tariff level covering the hour.
/// Every value is rounded to 4 decimals so the CSV round trip is exact.
struct SyntheticSpec {
  std::uint64_t seed = 1;
  double pv_peak_kw = 20.0;
  double base_load_kw = 8.0;
  double milking_peak_kw = 15.0;
  HourRange morning_milking{6, 8};
  HourRange evening_milking{17, 19};
  std::vector<TariffLevel> tariff_levels = default_tariff();
  double noise_std = 0.05;
  double cloud_depth = 0.4;

  static std::vector<TariffLevel> default_tariff();
  /// Throws ConfigError on negative powers or a tariff that does not cover
  /// every hour exactly once.
  void validate() const;
  double tariff_price(int hour) const;
};

double solar_season_factor(int month);
double solar_daylength_hours(int month);

TimeSeriesYear generate_synthetic(const SyntheticSpec& spec);

/// CSV schema: `timestamp,load_kw,pv_kw,price`, timestamp `YYYY-MM-DDTHH:00:00`.
TimeSeriesYear load_csv(const std::filesystem::path& path);
TimeSeriesYear parse_csv(std::istream& in, DataSource source);
void write_csv(const TimeSeriesYear& year, const std::filesystem::path& path);
void write_csv(const TimeSeriesYear& year, std::ostream& out);

/// Half-open hour-of-year window [begin, end).
struct EpisodeRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - begin; }
  friend bool operator==(const EpisodeRange&, const EpisodeRange&) = default;
};

/// Consecutive windows of `episode_len` hours inside each month of `role`;
/// a trailing partial window is dropped.
std::vector<EpisodeRange> slice_episodes(const TimeSeriesYear& year, const SplitSpec& split,
                                         Role role, std::size_t episode_len);

/// Indices of every hour that lies in one of `months`.
std::vector<std::size_t> month_indices(const std::set<int>& months);

/// Parses "1,7" or "2-12" style month lists.
std::set<int> parse_month_list(const std::string& text);
std::string format_month_list(const std::set<int>& months);

}  // namespace farm
