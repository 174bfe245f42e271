#pragma once

#include "farm/battery_env.hpp"
#include "farm/timeseries.hpp"

namespace farm {

struct TariffBounds {
  double lowest = 0.0;
  double highest = 0.0;

  static TariffBounds of(const TimeSeriesYear& year);
};

/// Charge on PV surplus or at the cheapest tariff (below soc_max); discharge
/// at the most expensive tariff when load exceeds PV (above soc_min); else idle.
BatteryAction rule_based_battery(const BatteryState& state, double price,
                                 const BatteryParams& params, const TariffBounds& tariff);

}  // namespace farm
