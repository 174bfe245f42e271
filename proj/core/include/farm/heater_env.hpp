#pragma once

#include <optional>
#include <set>
#include <vector>

#include "farm/battery_env.hpp"
#include "farm/forecast.hpp"
#include "farm/timeseries.hpp"

namespace farm {

enum class HeaterAction { Off = 0, On = 1 };
inline constexpr std::size_t kHeaterActionCount = 2;

/// What happens to an ON request once the daily run time is used up.
/// block: executed as OFF (the heater is locked out for the rest of the day).
/// track: executed as ON and run_time goes negative.
enum class OverusePolicy { block, track };

struct HeaterParams {
  double device_kw = 6.0;
  int daily_runtime_h = 3;
  double alpha_weight = 0.5;  // weight of the cost reward
  double beta_weight = 0.5;   // weight of the task reward
  double task_alpha = 10.0;
  double daily_penalty_mag = 10.0;
  std::vector<HourRange> desired_windows{{4, 10}};
  bool clamp_export = false;
  OverusePolicy overuse = OverusePolicy::track;

  void validate() const;
};

struct HeaterState {
  int hour = 0;
  double price = 0.0;
  double p_pv = 0.0;
  double p_background = 0.0;
  double p_net = 0.0;  // p_background + p_device
  double p_device = 0.0;
  int run_time = 0;  // ON-hours still owed today; negative after overuse
};

/// Summary of one finished day.
struct DayLedger {
  std::size_t day_index = 0;
  int on_hours_taken = 0;
  int run_time_end_of_day = 0;
  bool met = false;
  int on_hours_in_window = 0;
};

double cost_reward(const HeaterState& state, HeaterAction action, const HeaterParams& params);

/// `run_time_after` already reflects the action.
double task_reward(int run_time_after, HeaterAction action, bool at_day_boundary,
                   const HeaterParams& params);

struct HeaterStepResult {
  HeaterState next;
  double reward = 0.0;
  double cost = 0.0;
  double task = 0.0;
  double grid_import_kwh = 0.0;
  HeaterAction executed = HeaterAction::Off;
  int run_time_after = 0;  // before the day-boundary reset
  bool day_boundary = false;
};

/// The ON request is replaced by OFF under OverusePolicy::block when
/// run_time <= 0.
HeaterAction executed_action(const HeaterState& state, HeaterAction requested,
                             const HeaterParams& params);

/// One hour of the heater MDP. A step taken at hour 23 closes the day: the
/// daily penalty applies and the next state starts with a fresh run time.
HeaterStepResult heater_step(const HeaterState& state, HeaterAction action,
                             const TimeStepRecord& next_record, const HeaterParams& params);

/// State at the start of an episode at `record`.
HeaterState heater_initial_state(const TimeStepRecord& record, const HeaterParams& params);

struct HeaterNorm {
  FeatureStats price;
  FeatureStats pv;
  FeatureStats background;

  static HeaterNorm fit(const TimeSeriesYear& year, const std::set<int>& train_months);
};

inline constexpr std::size_t kHeaterBaseFeatures = 8;
/// h_left / 23 and slack / 24 in front of the forecast block.
inline constexpr std::size_t kHeaterPlanningFeatures = 2;

/// [sin hour, cos hour, z price, z pv, z background, z net, p_device / device_kw,
///  run_time / daily_runtime_h], followed when `block` is present by
/// [h_left / 23, slack / 24] and the flattened block (lead-major).
/// Throws ConfigError when `expected_mode` is set and the block disagrees.
std::vector<double> observe_heater(const HeaterState& state, const HeaterNorm& norm,
                                   const HeaterParams& params,
                                   const ForecastBlock* block = nullptr,
                                   std::optional<ForecastMode> expected_mode = std::nullopt);

bool in_desired_window(int hour, const HeaterParams& params);

}  // namespace farm
