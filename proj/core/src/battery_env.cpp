#include "farm/battery_env.hpp"

#include <algorithm>
#include <cmath>

#include "farm/errors.hpp"

namespace farm {

void BatteryParams::validate() const {
  if (!(0.0 <= soc_min && soc_min < soc_max && soc_max <= 1.0))
    throw ConfigError("battery SOC bounds must satisfy 0 <= soc_min < soc_max <= 1");
  if (!(capacity_kwh > 0.0) || !(rate_kw > 0.0))
    throw ConfigError("battery capacity and rate must be positive");
  if (initial_soc < 0.0 || initial_soc > 1.0) throw ConfigError("initial_soc must lie in [0, 1]");
  if (penalty < 0.0) throw ConfigError("battery penalty magnitude must be non-negative");
}

FeatureStats FeatureStats::fit(const std::vector<double>& values) {
  FeatureStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::max(std::sqrt(sq / static_cast<double>(values.size())), 1e-8);
  return s;
}

BatteryNorm BatteryNorm::fit(const TimeSeriesYear& year, const std::set<int>& train_months) {
  std::vector<double> load;
  std::vector<double> pv;
  for (std::size_t i : month_indices(train_months)) {
    load.push_back(year[i].load_kw);
    pv.push_back(year[i].pv_kw);
  }
  return {FeatureStats::fit(load), FeatureStats::fit(pv)};
}

std::array<double, BatteryObservation::kSize> BatteryObservation::features() const {
  return {hour, static_cast<double>(soc_level) / 10.0, soc_cont, p_load, p_pv};
}

double battery_grid_term(const BatteryState& s, BatteryAction action, const BatteryParams& p) {
  switch (action) {
    case BatteryAction::Charge:
      return s.p_load + (p.rate_kw - s.p_pv);
    case BatteryAction::Discharge:
      return (s.p_load - s.p_pv) - p.rate_kw;
    case BatteryAction::Idle:
      break;
  }
  return s.p_load - s.p_pv;
}

bool battery_penalized(const BatteryState& s, BatteryAction action, const BatteryParams& p) {
  return (action == BatteryAction::Charge && s.soc >= p.soc_max) ||
         (action == BatteryAction::Discharge && s.soc <= p.soc_min);
}

double battery_reward(const BatteryState& s, BatteryAction action, double price,
                      const BatteryParams& p) {
  double grid = battery_grid_term(s, action, p);
  if (p.clamp_export) grid = std::max(grid, 0.0);
  double reward = -(grid * price);
  if (battery_penalized(s, action, p)) reward -= p.penalty;
  return reward;
}

BatteryStepResult battery_step(const BatteryState& s, BatteryAction action, double price,
                               const TimeStepRecord& next_record, const BatteryParams& p) {
  BatteryStepResult out;
  out.reward = battery_reward(s, action, price, p);

  const double step = p.rate_kw / p.capacity_kwh;
  double soc = s.soc;
  if (action == BatteryAction::Charge && s.soc < p.soc_max)
    soc = std::min(s.soc + step, p.soc_max);
  else if (action == BatteryAction::Discharge && s.soc > p.soc_min)
    soc = std::max(s.soc - step, p.soc_min);
  soc = std::clamp(soc, 0.0, 1.0);

  out.energy_moved_kwh = (soc - s.soc) * p.capacity_kwh;
  out.grid_import_kwh = std::max(0.0, s.p_load - s.p_pv + out.energy_moved_kwh);

  out.next.hour = next_record.hour;
  out.next.soc = soc;
  out.next.p_load = next_record.load_kw;
  out.next.p_pv = next_record.pv_kw;
  return out;
}

int soc_level(double soc) { return static_cast<int>(std::round(std::clamp(soc, 0.0, 1.0) * 10.0)); }

BatteryObservation observe_battery(const BatteryState& s, const BatteryNorm& norm) {
  BatteryObservation o;
  o.hour = static_cast<double>(s.hour) / 23.0;
  o.soc_level = soc_level(s.soc);
  o.soc_cont = s.soc;
  o.p_load = norm.load.z(s.p_load);
  o.p_pv = norm.pv.z(s.p_pv);
  return o;
}

}  // namespace farm
