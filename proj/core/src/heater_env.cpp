#include "farm/heater_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "farm/errors.hpp"

namespace farm {

void HeaterParams::validate() const {
  if (std::abs(alpha_weight + beta_weight - 1.0) > 1e-9)
    throw ConfigError("heater reward weights must sum to 1");
  if (daily_runtime_h < 1 || daily_runtime_h > 24)
    throw ConfigError("daily_runtime_h must lie in [1, 24]");
  if (!(device_kw > 0.0)) throw ConfigError("device_kw must be positive");
  for (const auto& w : desired_windows)
    if (w.begin < 0 || w.end > 24 || w.begin >= w.end)
      throw ConfigError("desired windows must be non-empty ranges within [0, 24)");
}

double cost_reward(const HeaterState& s, HeaterAction action, const HeaterParams& p) {
  const double device = action == HeaterAction::On ? p.device_kw : 0.0;
  double grid = (s.p_background + device) - s.p_pv;
  if (p.clamp_export) grid = std::max(grid, 0.0);
  return -s.price * grid;
}

double task_reward(int run_time_after, HeaterAction action, bool at_day_boundary,
                   const HeaterParams& p) {
  const double rt = static_cast<double>(run_time_after);
  double penalty = 0.0;
  if (at_day_boundary) penalty = run_time_after == 0 ? p.daily_penalty_mag : -p.daily_penalty_mag;
  if (action == HeaterAction::On) return -(1.0 + rt) + penalty;
  return (1.0 - rt - p.task_alpha) + penalty;
}

HeaterAction executed_action(const HeaterState& s, HeaterAction requested, const HeaterParams& p) {
  if (requested == HeaterAction::On && p.overuse == OverusePolicy::block && s.run_time <= 0)
    return HeaterAction::Off;
  return requested;
}

HeaterStepResult heater_step(const HeaterState& s, HeaterAction action,
                             const TimeStepRecord& next_record, const HeaterParams& p) {
  HeaterStepResult out;
  out.executed = executed_action(s, action, p);
  const bool on = out.executed == HeaterAction::On;
  out.run_time_after = s.run_time - (on ? 1 : 0);
  out.day_boundary = s.hour == 23;

  out.cost = cost_reward(s, out.executed, p);
  out.task = task_reward(out.run_time_after, out.executed, out.day_boundary, p);
  out.reward = p.alpha_weight * out.cost + p.beta_weight * out.task;
  out.grid_import_kwh = std::max(0.0, s.p_background + (on ? p.device_kw : 0.0) - s.p_pv);

  out.next.hour = next_record.hour;
  out.next.price = next_record.price;
  out.next.p_pv = next_record.pv_kw;
  out.next.p_background = next_record.load_kw;
  out.next.p_device = on ? p.device_kw : 0.0;
  out.next.p_net = out.next.p_background + out.next.p_device;
  out.next.run_time = out.day_boundary ? p.daily_runtime_h : out.run_time_after;
  return out;
}

HeaterState heater_initial_state(const TimeStepRecord& r, const HeaterParams& p) {
  HeaterState s;
  s.hour = r.hour;
  s.price = r.price;
  s.p_pv = r.pv_kw;
  s.p_background = r.load_kw;
  s.p_device = 0.0;
  s.p_net = r.load_kw;
  s.run_time = p.daily_runtime_h;
  return s;
}

HeaterNorm HeaterNorm::fit(const TimeSeriesYear& year, const std::set<int>& train_months) {
  std::vector<double> price;
  std::vector<double> pv;
  std::vector<double> bg;
  for (std::size_t i : month_indices(train_months)) {
    price.push_back(year[i].price);
    pv.push_back(year[i].pv_kw);
    bg.push_back(year[i].load_kw);
  }
  return {FeatureStats::fit(price), FeatureStats::fit(pv), FeatureStats::fit(bg)};
}

std::vector<double> observe_heater(const HeaterState& s, const HeaterNorm& norm,
                                   const HeaterParams& p, const ForecastBlock* block,
                                   std::optional<ForecastMode> expected_mode) {
  std::vector<double> obs;
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(s.hour) / 24.0;
  obs.reserve(kHeaterBaseFeatures + kHeaterPlanningFeatures +
              (block ? block->values.size() : 0));
  obs.push_back(std::sin(angle));
  obs.push_back(std::cos(angle));
  obs.push_back(norm.price.z(s.price));
  obs.push_back(norm.pv.z(s.p_pv));
  obs.push_back(norm.background.z(s.p_background));
  obs.push_back(norm.background.z(s.p_net));
  obs.push_back(s.p_device / p.device_kw);
  obs.push_back(static_cast<double>(s.run_time) / static_cast<double>(p.daily_runtime_h));
  if (expected_mode && !block)
    throw ConfigError(std::string("forecast mode '") + to_string(*expected_mode) +
                      "' declared but no forecast block supplied");
  if (!block) return obs;
  if (expected_mode && *expected_mode != block->mode)
    throw ConfigError(std::string("forecast block has mode '") + to_string(block->mode) +
                      "' but the observation expects '" + to_string(*expected_mode) + "'");
  if (block->values.size() != block->horizon * block->channels())
    throw ConfigError("forecast block holds " + std::to_string(block->values.size()) +
                      " values, expected " + std::to_string(block->horizon * block->channels()));
  const auto plan = planning_scalars(s.hour, s.run_time);
  obs.push_back(static_cast<double>(plan.h_left) / 23.0);
  obs.push_back(static_cast<double>(plan.slack) / 24.0);
  obs.insert(obs.end(), block->values.begin(), block->values.end());
  return obs;
}

bool in_desired_window(int hour, const HeaterParams& p) {
  return std::any_of(p.desired_windows.begin(), p.desired_windows.end(),
                     [hour](const HourRange& w) { return w.contains(hour); });
}

}  // namespace farm
