#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "farm/timeseries.hpp"

namespace farm {

enum class ForecastMode { one, all };

inline constexpr std::size_t kForecastHorizon = 24;

/// 2 channels (demand p50, pv p50) or 6 (demand p10/p50/p90, pv p10/p50/p90).
std::size_t forecast_channels(ForecastMode mode);
ForecastMode parse_forecast_mode(const std::string& text);
const char* to_string(ForecastMode mode);

/// Read-only hourly series. Forecasting code reads values only through at(),
/// which lets tests audit the indices touched.
class SeriesView {
 public:
  explicit SeriesView(std::span<const double> data) : data_(data) {}
  virtual ~SeriesView() = default;
  virtual double at(std::size_t i) const { return data_[i]; }
  std::size_t size() const { return data_.size(); }

 private:
  std::span<const double> data_;
};

/// Same hour of the previous day; indices below 24 forecast themselves.
double seasonal_naive_p50(const SeriesView& series, std::size_t t);
double seasonal_naive_p50(std::span<const double> series, std::size_t t);

/// Percentile with linear interpolation between the closest order statistics
/// (position q * (n - 1) in the sorted sample).
double empirical_percentile(std::vector<double> sample, double q);

/// Residual percentiles per (month, hour-of-day).
struct ResidualBandTable {
  std::map<std::pair<int, int>, double> q10;
  std::map<std::pair<int, int>, double> q90;
  std::set<int> fitted_on;

  /// Fitted month used for `month`: itself when fitted, otherwise the nearest
  /// fitted month on the 12-month circle, ties going to the earlier month.
  int resolve_month(int month) const;
  double lower(int month, int hour) const;
  double upper(int month, int hour) const;
};

/// Minimum samples in a (month, hour) bucket; smaller buckets use the
/// all-hours percentile of their month.
inline constexpr std::size_t kMinBucketSamples = 4;

ResidualBandTable fit_bands(std::span<const double> series, const SplitSpec& split);

/// Residuals y_t - y_{t-24} of one (month, hour) bucket over the training months.
std::vector<double> bucket_residuals(std::span<const double> series, int month, int hour);

/// In-sample residual mass outside the band of one fitted (month, hour) bucket.
struct BucketCoverage {
  int month = 1;
  int hour = 0;
  std::size_t n = 0;
  double below_q10 = 0.0;  // fraction strictly below q10
  double above_q90 = 0.0;  // fraction strictly above q90
  bool point_mass = false;  // q10 == q90, e.g. PV at night
};

std::vector<BucketCoverage> band_coverage(std::span<const double> series,
                                          const ResidualBandTable& bands);

struct ChannelStats {
  double mean = 0.0;
  double std = 1.0;
};

/// Z-scoring of the demand and pv forecast channels with training-month
/// statistics; results are clipped to +/- clip_sigma.
struct Normalizer {
  ChannelStats demand;
  ChannelStats pv;
  double clip_sigma = 5.0;

  static Normalizer fit(std::span<const double> demand, std::span<const double> pv,
                        const std::set<int>& train_months);
  double normalize_demand(double v) const;
  double normalize_pv(double v) const;
};

struct ForecastBlock {
  ForecastMode mode = ForecastMode::one;
  std::size_t horizon = kForecastHorizon;
  std::vector<double> values;  // row-major, horizon x channels

  std::size_t channels() const { return forecast_channels(mode); }
  double at(std::size_t lead_row, std::size_t channel) const {
    return values[lead_row * channels() + channel];
  }
};

/// Un-normalized quantiles for one lead: demand then pv, p10 <= p50 <= p90.
struct LeadQuantiles {
  double demand_p10 = 0.0;
  double demand_p50 = 0.0;
  double demand_p90 = 0.0;
  double pv_p10 = 0.0;
  double pv_p50 = 0.0;
  double pv_p90 = 0.0;
};

/// Quantiles for leads 1..24 issued at index t, reading only indices <= t.
std::vector<LeadQuantiles> forecast_quantiles(const SeriesView& demand, const SeriesView& pv,
                                              std::size_t t, const ResidualBandTable& bands_demand,
                                              const ResidualBandTable& bands_pv);

/// Throws HorizonError when t + 24 runs past the end of the series.
ForecastBlock make_block(const SeriesView& demand, const SeriesView& pv, std::size_t t,
                         const ResidualBandTable& bands_demand, const ResidualBandTable& bands_pv,
                         const Normalizer& norm, ForecastMode mode);

struct PlanningScalars {
  int h_left = 0;
  int slack = 0;
};

/// h_left = 23 - hour; slack = h_left - run_time (negative means urgency).
PlanningScalars planning_scalars(int hour, int run_time);

/// `month,hour,q10_demand,q90_demand,q10_pv,q90_pv` for every fitted (month, hour).
void write_bands_csv(const ResidualBandTable& demand, const ResidualBandTable& pv,
                     const std::filesystem::path& path);
/// `channel,mean,std`
void write_normalizer_csv(const Normalizer& norm, const std::filesystem::path& path);

}  // namespace farm
