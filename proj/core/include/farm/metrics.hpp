#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "farm/heater_env.hpp"

namespace farm {

struct HourlyRecord {
  std::size_t index = 0;
  int month = 1;
  int hour = 0;
  double grid_import_kwh = 0.0;
  double price = 0.0;
  double cost = 0.0;  // price * grid_import_kwh
  int action = 0;
  double soc = 0.0;
  double device_kw = 0.0;
};

struct MonthlyAggregate {
  int month = 1;
  double import_kwh = 0.0;
  double cost = 0.0;
  double peak_kw = 0.0;  // mean over days of the daily maximum hourly import
  std::optional<double> satisfaction;  // heater runs only
  std::size_t hours = 0;
};

/// Mean grid import per hour of day over the evaluation period.
struct PeakProfile {
  std::array<double, 24> kw{};
  double peak() const;
};

class RunReport {
 public:
  /// Derives the monthly aggregates from the hourly records. When `monthly`
  /// is supplied it must agree with them (ValidationError otherwise).
  RunReport(std::string env, std::string agent, std::uint64_t seed,
            std::vector<HourlyRecord> hours, std::vector<DayLedger> days = {},
            std::optional<std::vector<MonthlyAggregate>> monthly = std::nullopt);

  const std::string& env() const { return env_; }
  const std::string& agent() const { return agent_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<HourlyRecord>& hours() const { return hours_; }
  const std::vector<DayLedger>& days() const { return days_; }
  const std::vector<MonthlyAggregate>& monthly() const { return monthly_; }

 private:
  std::string env_;
  std::string agent_;
  std::uint64_t seed_;
  std::vector<HourlyRecord> hours_;
  std::vector<DayLedger> days_;
  std::vector<MonthlyAggregate> monthly_;
};

std::vector<MonthlyAggregate> monthly_aggregates(const std::vector<HourlyRecord>& hours,
                                                 const std::vector<DayLedger>& days);

double total_cost(const std::vector<HourlyRecord>& hours);
double total_cost(const RunReport& report);
double total_import(const std::vector<HourlyRecord>& hours);
double total_import(const RunReport& report);

PeakProfile peak_profile(const std::vector<HourlyRecord>& hours);

/// (max(base) - max(scheduled)) / max(base); DegenerateError when max(base) == 0.
double peak_reduction(const PeakProfile& base, const PeakProfile& scheduled);

/// Fraction of days whose run time ended exactly at zero.
double satisfaction_rate(const std::vector<DayLedger>& days);

/// Fraction of ON hours that fell inside the desired windows.
double window_adherence(const std::vector<DayLedger>& days);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;     // after dropping zeros
  bool exact = true;
};

inline constexpr std::size_t kWilcoxonExactMax = 25;

/// Exact null distribution for n <= 25 (average ranks on ties), otherwise the
/// normal approximation with continuity and tie corrections.
/// DegenerateError when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs);

double median(std::vector<double> values);

}  // namespace farm
