#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "farm/battery_env.hpp"
#include "farm/forecast.hpp"
#include "farm/heater_env.hpp"
#include "farm/rng.hpp"
#include "farm/timeseries.hpp"

namespace farm {

/// Flat observation: `scalar_size` features followed by a horizon x channels
/// block stored lead-major.
struct ObservationLayout {
  std::size_t scalar_size = 0;
  std::size_t horizon = 0;
  std::size_t channels = 0;

  std::size_t size() const { return scalar_size + horizon * channels; }
  bool has_sequence() const { return horizon > 0 && channels > 0; }
  friend bool operator==(const ObservationLayout&, const ObservationLayout&) = default;
};

struct StepOutcome {
  std::vector<double> obs;  // observation after the step
  double reward = 0.0;
  bool done = false;
};

/// Episodic environment with a finite action set.
class DiscreteEnv {
 public:
  virtual ~DiscreteEnv() = default;
  virtual ObservationLayout layout() const = 0;
  virtual std::size_t action_count() const = 0;
  /// Starts a training episode drawn with `rng`.
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepOutcome step(std::size_t action) = 0;
};

/// Two arms, arm 0 pays 1 and arm 1 pays 0; single-step episodes with
/// uninformative random features.
class BanditEnv : public DiscreteEnv {
 public:
  explicit BanditEnv(std::size_t features = 2) : features_(features) {}
  ObservationLayout layout() const override { return {features_, 0, 0}; }
  std::size_t action_count() const override { return 2; }
  std::vector<double> reset(Rng& rng) override;
  StepOutcome step(std::size_t action) override;

 private:
  std::size_t features_;
  std::vector<double> obs_;
};

/// Per-hour bookkeeping of the most recent step, used by evaluation.
struct HourOutcome {
  std::size_t index = 0;
  int month = 1;
  int hour = 0;
  std::size_t action = 0;    // executed action
  double grid_import_kwh = 0.0;
  double price = 0.0;
  double reward = 0.0;
  double soc = 0.0;          // battery only
  double device_kw = 0.0;    // heater only
};

/// Day-long battery episodes starting from initial_soc.
class BatteryEnv : public DiscreteEnv {
 public:
  BatteryEnv(const TimeSeriesYear& year, const SplitSpec& split, BatteryParams params,
             std::size_t episode_len = 24);

  ObservationLayout layout() const override { return {BatteryObservation::kSize, 0, 0}; }
  std::size_t action_count() const override { return kBatteryActionCount; }
  std::vector<double> reset(Rng& rng) override;
  StepOutcome step(std::size_t action) override;

  std::vector<double> reset_to(const EpisodeRange& range);
  const std::vector<EpisodeRange>& episodes(Role role) const;
  const BatteryState& state() const { return state_; }
  const BatteryParams& params() const { return params_; }
  const BatteryNorm& norm() const { return norm_; }
  const HourOutcome& last() const { return last_; }
  std::vector<double> observation() const;
  /// Price of the hour the current state refers to.
  double current_price() const;

 private:
  const TimeSeriesYear& year_;
  BatteryParams params_;
  BatteryNorm norm_;
  std::vector<EpisodeRange> train_;
  std::vector<EpisodeRange> test_;
  std::size_t index_ = 0;
  std::size_t end_ = 0;
  BatteryState state_;
  HourOutcome last_;
};

struct HeaterForecastSetup {
  ForecastMode mode = ForecastMode::all;
};

/// Day-long heater episodes from midnight to midnight. With a forecast
/// setup the observation carries the planning scalars and a 24-lead block.
class HeaterEnv : public DiscreteEnv {
 public:
  HeaterEnv(const TimeSeriesYear& year, const SplitSpec& split, HeaterParams params,
            std::optional<HeaterForecastSetup> forecast = std::nullopt);

  ObservationLayout layout() const override;
  std::size_t action_count() const override { return kHeaterActionCount; }
  std::vector<double> reset(Rng& rng) override;
  StepOutcome step(std::size_t action) override;

  std::vector<double> reset_to(const EpisodeRange& range);
  const std::vector<EpisodeRange>& episodes(Role role) const;
  const HeaterState& state() const { return state_; }
  const HeaterParams& params() const { return params_; }
  const HourOutcome& last() const { return last_; }
  /// Ledger of the day closed by the most recent step, if any.
  const std::optional<DayLedger>& closed_day() const { return closed_; }
  std::vector<double> observation() const;
  const ResidualBandTable* demand_bands() const { return bands_d_ ? &*bands_d_ : nullptr; }
  const ResidualBandTable* pv_bands() const { return bands_pv_ ? &*bands_pv_ : nullptr; }

 private:
  const TimeSeriesYear& year_;
  HeaterParams params_;
  HeaterNorm norm_;
  std::optional<HeaterForecastSetup> forecast_;
  std::optional<ResidualBandTable> bands_d_;
  std::optional<ResidualBandTable> bands_pv_;
  std::vector<ForecastBlock> blocks_;  // one per hour of the year
  std::vector<EpisodeRange> train_;
  std::vector<EpisodeRange> test_;
  std::size_t index_ = 0;
  std::size_t end_ = 0;
  HeaterState state_;
  int on_hours_ = 0;
  int on_in_window_ = 0;
  HourOutcome last_;
  std::optional<DayLedger> closed_;
};

/// Series extended by its first day, so a 24-lead forecast issued in the
/// last hours of the year has data to index (the year is treated as cyclic).
std::vector<double> wrap_day(const std::vector<double>& series);

}  // namespace farm
