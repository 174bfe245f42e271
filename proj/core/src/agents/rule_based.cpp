#include "farm/agents/rule_based.hpp"

#include <algorithm>

namespace farm {

TariffBounds TariffBounds::of(const TimeSeriesYear& year) {
  TariffBounds t{year[0].price, year[0].price};
  for (const auto& r : year.records()) {
    t.lowest = std::min(t.lowest, r.price);
    t.highest = std::max(t.highest, r.price);
  }
  return t;
}

BatteryAction rule_based_battery(const BatteryState& s, double price, const BatteryParams& p,
                                 const TariffBounds& tariff) {
  const bool room = s.soc < p.soc_max;
  if ((s.p_pv > s.p_load && room) || (price <= tariff.lowest && room))
    return BatteryAction::Charge;
  if (price >= tariff.highest && s.soc > p.soc_min && s.p_load > s.p_pv)
    return BatteryAction::Discharge;
  return BatteryAction::Idle;
}

}  // namespace farm
