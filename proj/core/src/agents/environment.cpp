#include "farm/agents/environment.hpp"

#include "farm/errors.hpp"

namespace farm {

std::vector<double> BanditEnv::reset(Rng& rng) {
  obs_.assign(features_, 0.0);
  for (double& v : obs_) v = rng.normal();
  return obs_;
}

StepOutcome BanditEnv::step(std::size_t action) {
  if (action >= 2) throw ConfigError("bandit action out of range");
  return {obs_, action == 0 ? 1.0 : 0.0, true};
}

std::vector<double> wrap_day(const std::vector<double>& series) {
  std::vector<double> out = series;
  out.insert(out.end(), series.begin(),
             series.begin() + static_cast<std::ptrdiff_t>(std::min(kHoursPerDay, series.size())));
  return out;
}

namespace {

std::size_t next_index(std::size_t i, std::size_t n) { return i + 1 < n ? i + 1 : 0; }

const EpisodeRange& pick(const std::vector<EpisodeRange>& eps, Rng& rng) {
  if (eps.empty()) throw ConfigError("no training episodes available");
  return eps[rng.below(eps.size())];
}

}  // namespace

BatteryEnv::BatteryEnv(const TimeSeriesYear& year, const SplitSpec& split, BatteryParams params,
                       std::size_t episode_len)
    : year_(year), params_(params) {
  params_.validate();
  split.validate();
  norm_ = BatteryNorm::fit(year, split.train_months);
  train_ = slice_episodes(year, split, Role::train, episode_len);
  if (!split.test_months.empty()) test_ = slice_episodes(year, split, Role::test, episode_len);
}

const std::vector<EpisodeRange>& BatteryEnv::episodes(Role role) const {
  return role == Role::train ? train_ : test_;
}

std::vector<double> BatteryEnv::reset(Rng& rng) { return reset_to(pick(train_, rng)); }

std::vector<double> BatteryEnv::reset_to(const EpisodeRange& range) {
  index_ = range.begin;
  end_ = range.end;
  const auto& r = year_[index_];
  state_ = BatteryState{r.hour, params_.initial_soc, r.load_kw, r.pv_kw};
  return observation();
}

std::vector<double> BatteryEnv::observation() const {
  const auto f = observe_battery(state_, norm_).features();
  return {f.begin(), f.end()};
}

double BatteryEnv::current_price() const { return year_[index_].price; }

StepOutcome BatteryEnv::step(std::size_t action) {
  if (action >= kBatteryActionCount) throw ConfigError("battery action out of range");
  if (index_ >= end_) throw ConfigError("battery episode already finished");
  const auto& rec = year_[index_];
  const auto& next = year_[next_index(index_, year_.size())];
  const auto res = battery_step(state_, static_cast<BatteryAction>(action), rec.price, next, params_);
  last_ = HourOutcome{rec.index, rec.month, rec.hour, action, res.grid_import_kwh, rec.price,
                      res.reward, res.next.soc, 0.0};
  state_ = res.next;
  ++index_;
  return {observation(), res.reward, index_ >= end_};
}

HeaterEnv::HeaterEnv(const TimeSeriesYear& year, const SplitSpec& split, HeaterParams params,
                     std::optional<HeaterForecastSetup> forecast)
    : year_(year), params_(std::move(params)), forecast_(forecast) {
  params_.validate();
  split.validate();
  norm_ = HeaterNorm::fit(year, split.train_months);
  train_ = slice_episodes(year, split, Role::train, kHoursPerDay);
  if (!split.test_months.empty()) test_ = slice_episodes(year, split, Role::test, kHoursPerDay);
  if (forecast_) {
    const auto demand = wrap_day(year.load());
    const auto pv = wrap_day(year.pv());
    bands_d_ = fit_bands(year.load(), split);
    bands_pv_ = fit_bands(year.pv(), split);
    const auto norm = Normalizer::fit(year.load(), year.pv(), split.train_months);
    const SeriesView dv(demand);
    const SeriesView pvv(pv);
    blocks_.reserve(year.size());
    for (std::size_t t = 0; t < year.size(); ++t)
      blocks_.push_back(make_block(dv, pvv, t, *bands_d_, *bands_pv_, norm, forecast_->mode));
  }
}

ObservationLayout HeaterEnv::layout() const {
  if (!forecast_) return {kHeaterBaseFeatures, 0, 0};
  return {kHeaterBaseFeatures + kHeaterPlanningFeatures, kForecastHorizon,
          forecast_channels(forecast_->mode)};
}

const std::vector<EpisodeRange>& HeaterEnv::episodes(Role role) const {
  return role == Role::train ? train_ : test_;
}

std::vector<double> HeaterEnv::reset(Rng& rng) { return reset_to(pick(train_, rng)); }

std::vector<double> HeaterEnv::reset_to(const EpisodeRange& range) {
  index_ = range.begin;
  end_ = range.end;
  state_ = heater_initial_state(year_[index_], params_);
  on_hours_ = 0;
  on_in_window_ = 0;
  closed_.reset();
  return observation();
}

std::vector<double> HeaterEnv::observation() const {
  if (!forecast_) return observe_heater(state_, norm_, params_);
  return observe_heater(state_, norm_, params_, &blocks_[index_ % blocks_.size()], forecast_->mode);
}

StepOutcome HeaterEnv::step(std::size_t action) {
  if (action >= kHeaterActionCount) throw ConfigError("heater action out of range");
  if (index_ >= end_) throw ConfigError("heater episode already finished");
  const auto& rec = year_[index_];
  const auto& next = year_[next_index(index_, year_.size())];
  const auto res = heater_step(state_, static_cast<HeaterAction>(action), next, params_);
  const bool on = res.executed == HeaterAction::On;
  if (on) {
    ++on_hours_;
    if (in_desired_window(rec.hour, params_)) ++on_in_window_;
  }
  last_ = HourOutcome{rec.index, rec.month, rec.hour, static_cast<std::size_t>(res.executed),
                      res.grid_import_kwh, rec.price, res.reward, 0.0, on ? params_.device_kw : 0.0};
  closed_.reset();
  if (res.day_boundary) {
    closed_ = DayLedger{static_cast<std::size_t>(day_of_year(rec.index)), on_hours_,
                        res.run_time_after, res.run_time_after == 0, on_in_window_};
    on_hours_ = 0;
    on_in_window_ = 0;
  }
  state_ = res.next;
  ++index_;
  const bool done = index_ >= end_;
  return {observation(), res.reward, done};
}

}  // namespace farm
