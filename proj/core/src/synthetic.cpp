#include <algorithm>
#include <cmath>
#include <numbers>

#include "farm/errors.hpp"
#include "farm/rng.hpp"
#include "farm/timeseries.hpp"

namespace farm {

namespace {

double quantize(double v) { return std::round(v * 1e4) / 1e4; }

double season_phase(int month) {
  return std::cos(2.0 * std::numbers::pi * (static_cast<double>(month) - 6.5) / 12.0);
}

}  // namespace

std::vector<TariffLevel> SyntheticSpec::default_tariff() {
  return {
      {{{0, 7}}, 0.10},
      {{{7, 17}, {20, 24}}, 0.20},
      {{{17, 20}}, 0.30},
  };
}

void SyntheticSpec::validate() const {
  if (pv_peak_kw < 0.0 || base_load_kw < 0.0 || milking_peak_kw < 0.0)
    throw ConfigError("synthetic powers must be non-negative");
  if (noise_std < 0.0) throw ConfigError("noise_std must be non-negative");
  if (cloud_depth < 0.0 || cloud_depth > 1.0) throw ConfigError("cloud_depth must lie in [0, 1]");
  for (const auto& r : {morning_milking, evening_milking})
    if (r.begin < 0 || r.end > 24 || r.begin > r.end)
      throw ConfigError("milking hours must lie within [0, 24)");
  for (int h = 0; h < 24; ++h) {
    int covered = 0;
    for (const auto& level : tariff_levels) {
      if (level.price < 0.0) throw ConfigError("tariff prices must be non-negative");
      for (const auto& r : level.hours) covered += r.contains(h) ? 1 : 0;
    }
    if (covered != 1)
      throw ConfigError("tariff must cover hour " + std::to_string(h) + " exactly once");
  }
}

double SyntheticSpec::tariff_price(int hour) const {
  for (const auto& level : tariff_levels)
    for (const auto& r : level.hours)
      if (r.contains(hour)) return level.price;
  throw ConfigError("tariff does not cover hour " + std::to_string(hour));
}

double solar_season_factor(int month) { return 0.45 + 0.4 * season_phase(month); }

double solar_daylength_hours(int month) { return 12.0 + 4.0 * season_phase(month); }

TimeSeriesYear generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Rng load_rng = rng.split();
  Rng pv_rng = rng.split();
  Rng cloud_rng = rng.split();

  std::vector<TimeStepRecord> records(kHoursPerYear);
  double cloud = 1.0;
  for (std::size_t i = 0; i < kHoursPerYear; ++i) {
    auto& r = records[i];
    r.index = i;
    r.hour = hour_of_index(i);
    r.month = month_of_index(i);
    if (r.hour == 0) cloud = 1.0 - spec.cloud_depth * cloud_rng.uniform();

    double load = spec.base_load_kw;
    if (spec.morning_milking.contains(r.hour) || spec.evening_milking.contains(r.hour))
      load += spec.milking_peak_kw;
    load *= 1.0 + spec.noise_std * load_rng.normal();
    r.load_kw = quantize(std::max(0.0, load));

    const double daylength = solar_daylength_hours(r.month);
    const double sunrise = 12.0 - 0.5 * daylength;
    const double elevation =
        std::sin(std::numbers::pi * (static_cast<double>(r.hour) + 0.5 - sunrise) / daylength);
    const double hourly_noise = 1.0 + spec.noise_std * pv_rng.normal();
    double pv = 0.0;
    const double t = static_cast<double>(r.hour) + 0.5 - sunrise;
    if (t > 0.0 && t < daylength && elevation > 0.0)
      pv = spec.pv_peak_kw * solar_season_factor(r.month) * cloud * elevation * hourly_noise;
    r.pv_kw = quantize(std::max(0.0, pv));

    r.price = quantize(spec.tariff_price(r.hour));
  }
  DataSource source;
  source.kind = DataSource::Kind::synthetic;
  source.seed = spec.seed;
  return TimeSeriesYear(std::move(records), std::move(source));
}

}  // namespace farm
