#pragma once

#include <array>
#include <set>
#include <vector>

#include "farm/timeseries.hpp"

namespace farm {

enum class BatteryAction { Charge = 0, Discharge = 1, Idle = 2 };
inline constexpr std::size_t kBatteryActionCount = 3;

struct BatteryParams {
  double capacity_kwh = 13.5;
  double rate_kw = 5.0;  // charge/discharge power per hourly step
  double soc_min = 0.15;
  double soc_max = 0.85;
  double penalty = 15.0;  // subtracted from the reward on an invalid action
  double initial_soc = 0.5;
  bool clamp_export = false;

  /// Throws ConfigError unless 0 <= soc_min < soc_max <= 1 and capacity, rate > 0.
  void validate() const;
};

struct BatteryState {
  int hour = 0;
  double soc = 0.5;
  double p_load = 0.0;
  double p_pv = 0.0;
};

/// Mean / standard deviation of one feature, fitted on training months.
struct FeatureStats {
  double mean = 0.0;
  double std = 1.0;

  static FeatureStats fit(const std::vector<double>& values);
  double z(double v) const { return (v - mean) / std; }
};

struct BatteryNorm {
  FeatureStats load;
  FeatureStats pv;

  static BatteryNorm fit(const TimeSeriesYear& year, const std::set<int>& train_months);
};

struct BatteryObservation {
  double hour = 0.0;  // hour / 23
  int soc_level = 0;  // round(soc * 10), half away from zero
  double soc_cont = 0.0;
  double p_load = 0.0;  // z-scored
  double p_pv = 0.0;    // z-scored

  static constexpr std::size_t kSize = 5;
  std::array<double, kSize> features() const;
};

/// Grid energy of the reward case matching `action`, before any clamping:
/// Charge: load + (rate - pv); Discharge: (load - pv) - rate; Idle: load - pv.
double battery_grid_term(const BatteryState& state, BatteryAction action,
                         const BatteryParams& params);

/// True when the action is invalid for the pre-action SOC (boundary inclusive).
bool battery_penalized(const BatteryState& state, BatteryAction action,
                       const BatteryParams& params);

double battery_reward(const BatteryState& state, BatteryAction action, double price,
                      const BatteryParams& params);

struct BatteryStepResult {
  BatteryState next;
  double reward = 0.0;
  double grid_import_kwh = 0.0;
  double energy_moved_kwh = 0.0;  // + stored, - released
};

/// Applies one hour. `price` is the tariff of the current hour. Imports are
/// computed from the energy that actually entered or left the battery.
BatteryStepResult battery_step(const BatteryState& state, BatteryAction action, double price,
                               const TimeStepRecord& next_record, const BatteryParams& params);

BatteryObservation observe_battery(const BatteryState& state, const BatteryNorm& norm);

int soc_level(double soc);

}  // namespace farm
