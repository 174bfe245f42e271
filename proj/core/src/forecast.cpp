#include "farm/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "farm/errors.hpp"

namespace farm {

std::size_t forecast_channels(ForecastMode mode) { return mode == ForecastMode::one ? 2 : 6; }

ForecastMode parse_forecast_mode(const std::string& text) {
  if (text == "one") return ForecastMode::one;
  if (text == "all") return ForecastMode::all;
  throw ConfigError("forecast mode must be 'one' or 'all', got '" + text + "'");
}

const char* to_string(ForecastMode mode) { return mode == ForecastMode::one ? "one" : "all"; }

double seasonal_naive_p50(const SeriesView& series, std::size_t t) {
  return t >= kHoursPerDay ? series.at(t - kHoursPerDay) : series.at(t);
}

double seasonal_naive_p50(std::span<const double> series, std::size_t t) {
  return seasonal_naive_p50(SeriesView(series), t);
}

double empirical_percentile(std::vector<double> sample, double q) {
  if (sample.empty()) throw DegenerateError("percentile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

int ResidualBandTable::resolve_month(int month) const {
  if (fitted_on.empty()) throw ConfigError("band table has no fitted months");
  if (fitted_on.count(month)) return month;
  int best = *fitted_on.begin();
  int best_distance = circular_month_distance(month, best);
  for (int m : fitted_on) {
    const int d = circular_month_distance(month, m);
    if (d < best_distance) {
      best = m;
      best_distance = d;
    }
  }
  // Tie between two months at the same distance: the earlier one on the
  // circle, i.e. the one reached by walking backwards from `month`.
  for (int m : fitted_on) {
    if (m == best || circular_month_distance(month, m) != best_distance) continue;
    const int back = ((month - m) % 12 + 12) % 12;
    if (back == best_distance) best = m;
  }
  return best;
}

double ResidualBandTable::lower(int month, int hour) const {
  return q10.at({resolve_month(month), hour});
}

double ResidualBandTable::upper(int month, int hour) const {
  return q90.at({resolve_month(month), hour});
}

std::vector<double> bucket_residuals(std::span<const double> series, int month, int hour) {
  std::vector<double> out;
  const std::size_t start = month_start_index(month);
  for (std::size_t i = start + static_cast<std::size_t>(hour); i < start + month_hours(month);
       i += kHoursPerDay) {
    if (i < kHoursPerDay || i >= series.size()) continue;
    out.push_back(series[i] - series[i - kHoursPerDay]);
  }
  return out;
}

ResidualBandTable fit_bands(std::span<const double> series, const SplitSpec& split) {
  if (split.train_months.empty()) throw ConfigError("no training months to fit bands on");
  ResidualBandTable table;
  for (int m : split.train_months) {
    if (m < 1 || m > 12) throw ConfigError("month out of range: " + std::to_string(m));
    if (month_start_index(m) + month_hours(m) > series.size())
      throw ConfigError("training month " + std::to_string(m) + " is not covered by the series");

    std::array<std::vector<double>, kHoursPerDay> buckets;
    std::vector<double> all_hours;
    for (int h = 0; h < static_cast<int>(kHoursPerDay); ++h) {
      buckets[static_cast<std::size_t>(h)] = bucket_residuals(series, m, h);
      const auto& b = buckets[static_cast<std::size_t>(h)];
      all_hours.insert(all_hours.end(), b.begin(), b.end());
    }
    if (all_hours.empty())
      throw ConfigError("training month " + std::to_string(m) + " has no residuals");
    const double month_q10 = empirical_percentile(all_hours, 0.10);
    const double month_q90 = empirical_percentile(all_hours, 0.90);
    for (int h = 0; h < static_cast<int>(kHoursPerDay); ++h) {
      const auto& b = buckets[static_cast<std::size_t>(h)];
      const bool enough = b.size() >= kMinBucketSamples;
      table.q10[{m, h}] = enough ? empirical_percentile(b, 0.10) : month_q10;
      table.q90[{m, h}] = enough ? empirical_percentile(b, 0.90) : month_q90;
    }
    table.fitted_on.insert(m);
  }
  return table;
}

std::vector<BucketCoverage> band_coverage(std::span<const double> series,
                                          const ResidualBandTable& bands) {
  std::vector<BucketCoverage> out;
  for (int m : bands.fitted_on) {
    for (int h = 0; h < static_cast<int>(kHoursPerDay); ++h) {
      BucketCoverage c;
      c.month = m;
      c.hour = h;
      const auto res = bucket_residuals(series, m, h);
      const double lo = bands.lower(m, h);
      const double hi = bands.upper(m, h);
      c.n = res.size();
      c.point_mass = lo == hi;
      for (double r : res) {
        if (r < lo) c.below_q10 += 1.0;
        if (r > hi) c.above_q90 += 1.0;
      }
      if (c.n > 0) {
        c.below_q10 /= static_cast<double>(c.n);
        c.above_q90 /= static_cast<double>(c.n);
      }
      out.push_back(c);
    }
  }
  return out;
}

namespace {

ChannelStats fit_channel(std::span<const double> series, const std::set<int>& months) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i : month_indices(months)) {
    if (i >= series.size()) throw ConfigError("training months are not covered by the series");
    sum += series[i];
    ++n;
  }
  if (n == 0) throw ConfigError("no training months to fit the normalizer on");
  ChannelStats s;
  s.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i : month_indices(months)) sq += (series[i] - s.mean) * (series[i] - s.mean);
  s.std = std::max(std::sqrt(sq / static_cast<double>(n)), 1e-8);
  return s;
}

double z_clip(double v, const ChannelStats& s, double clip) {
  return std::clamp((v - s.mean) / s.std, -clip, clip);
}

}  // namespace

Normalizer Normalizer::fit(std::span<const double> demand, std::span<const double> pv,
                           const std::set<int>& train_months) {
  Normalizer n;
  n.demand = fit_channel(demand, train_months);
  n.pv = fit_channel(pv, train_months);
  return n;
}

double Normalizer::normalize_demand(double v) const { return z_clip(v, demand, clip_sigma); }

double Normalizer::normalize_pv(double v) const { return z_clip(v, pv, clip_sigma); }

std::vector<LeadQuantiles> forecast_quantiles(const SeriesView& demand, const SeriesView& pv,
                                              std::size_t t, const ResidualBandTable& bands_demand,
                                              const ResidualBandTable& bands_pv) {
  if (t + kForecastHorizon >= demand.size() || t + kForecastHorizon >= pv.size())
    throw HorizonError("forecast horizon t+24 = " + std::to_string(t + kForecastHorizon) +
                       " runs past the series end");
  std::vector<LeadQuantiles> out(kForecastHorizon);
  for (std::size_t lead = 1; lead <= kForecastHorizon; ++lead) {
    const std::size_t target = t + lead;
    // Same hour yesterday is at most t; before the first full day the latest
    // observation stands in, so nothing beyond t is ever read.
    const std::size_t source = target >= kHoursPerDay ? target - kHoursPerDay : std::min(target, t);
    const int month = month_of_index(target);
    const int hour = hour_of_index(target);
    auto& q = out[lead - 1];
    q.demand_p50 = demand.at(source);
    q.pv_p50 = pv.at(source);
    q.demand_p10 = q.demand_p50 + bands_demand.lower(month, hour);
    q.demand_p90 = q.demand_p50 + bands_demand.upper(month, hour);
    q.pv_p10 = q.pv_p50 + bands_pv.lower(month, hour);
    q.pv_p90 = q.pv_p50 + bands_pv.upper(month, hour);
  }
  return out;
}

ForecastBlock make_block(const SeriesView& demand, const SeriesView& pv, std::size_t t,
                         const ResidualBandTable& bands_demand, const ResidualBandTable& bands_pv,
                         const Normalizer& norm, ForecastMode mode) {
  const auto quantiles = forecast_quantiles(demand, pv, t, bands_demand, bands_pv);
  ForecastBlock block;
  block.mode = mode;
  block.values.reserve(kForecastHorizon * forecast_channels(mode));
  for (const auto& q : quantiles) {
    if (mode == ForecastMode::one) {
      block.values.push_back(norm.normalize_demand(q.demand_p50));
      block.values.push_back(norm.normalize_pv(q.pv_p50));
    } else {
      block.values.push_back(norm.normalize_demand(q.demand_p10));
      block.values.push_back(norm.normalize_demand(q.demand_p50));
      block.values.push_back(norm.normalize_demand(q.demand_p90));
      block.values.push_back(norm.normalize_pv(q.pv_p10));
      block.values.push_back(norm.normalize_pv(q.pv_p50));
      block.values.push_back(norm.normalize_pv(q.pv_p90));
    }
  }
  return block;
}

PlanningScalars planning_scalars(int hour, int run_time) {
  PlanningScalars s;
  s.h_left = 23 - hour;
  s.slack = s.h_left - run_time;
  return s;
}

void write_bands_csv(const ResidualBandTable& demand, const ResidualBandTable& pv,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "month,hour,q10_demand,q90_demand,q10_pv,q90_pv\n";
  char buf[160];
  for (int m : demand.fitted_on) {
    for (int h = 0; h < static_cast<int>(kHoursPerDay); ++h) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%.6f,%.6f\n", m, h, demand.lower(m, h),
                    demand.upper(m, h), pv.lower(m, h), pv.upper(m, h));
      out << buf;
    }
  }
}

void write_normalizer_csv(const Normalizer& norm, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  char buf[128];
  out << "channel,mean,std\n";
  std::snprintf(buf, sizeof(buf), "demand,%.6f,%.6f\n", norm.demand.mean, norm.demand.std);
  out << buf;
  std::snprintf(buf, sizeof(buf), "pv,%.6f,%.6f\n", norm.pv.mean, norm.pv.std);
  out << buf;
}

}  // namespace farm
