#include "farm/agents/tabular.hpp"

#include <algorithm>

#include "farm/errors.hpp"
#include "farm/forecast.hpp"

namespace farm {

void QTableConfig::validate() const {
  if (!(lr > 0.0 && lr <= 1.0)) throw ConfigError("q-table learning rate must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("q-table gamma must lie in [0, 1]");
  if (eps_decrement < 0.0 || eps_end < 0.0 || eps_start > 1.0)
    throw ConfigError("q-table exploration schedule is invalid");
  if (total_steps < 1) throw ConfigError("q-table total_steps must be positive");
}

QTableAgent::QTableAgent(std::size_t states, std::size_t actions, QTableConfig config,
                         std::uint64_t seed)
    : config_(config), states_(states), actions_(actions), rng_(seed), table_(states * actions, 0.0) {
  config_.validate();
}

double QTableAgent::epsilon(long step) const {
  return std::max(config_.eps_end, config_.eps_start - config_.eps_decrement * static_cast<double>(step));
}

std::size_t QTableAgent::act(std::size_t state) const {
  const auto row = table_.begin() + static_cast<std::ptrdiff_t>(state * actions_);
  return static_cast<std::size_t>(std::max_element(row, row + static_cast<std::ptrdiff_t>(actions_)) - row);
}

TrainSummary QTableAgent::train(TabularEnv& env, const StatsSink& sink) {
  if (env.state_count() != states_ || env.action_count() != actions_)
    throw ShapeError("q-table does not match the environment");
  Rng env_rng = rng_.split();
  TrainSummary summary;
  std::size_t s = env.reset(env_rng);
  double ep_return = 0.0;
  for (long step = 0; step < config_.total_steps; ++step) {
    const std::size_t a = rng_.uniform() < epsilon(step) ? rng_.below(actions_) : act(s);
    const TabularStep res = env.step(a);
    double target = res.reward;
    if (!res.done) target += config_.gamma * q(res.state, act(res.state));
    double& cell = table_[s * actions_ + a];
    cell += config_.lr * (target - cell);
    ep_return += res.reward;
    if (res.done) {
      summary.episode_returns.push_back(ep_return);
      if (sink) sink({"episode", step + 1, {{"return", ep_return}, {"epsilon", epsilon(step)}}});
      ep_return = 0.0;
      s = env.reset(env_rng);
    } else {
      s = res.state;
    }
  }
  summary.steps = config_.total_steps;
  return summary;
}

BatteryDiscretizer BatteryDiscretizer::fit(const TimeSeriesYear& year,
                                           const std::set<int>& train_months) {
  std::vector<double> load;
  std::vector<double> pv;
  for (std::size_t i : month_indices(train_months)) {
    load.push_back(year[i].load_kw);
    if (year[i].pv_kw > 0.0) pv.push_back(year[i].pv_kw);
  }
  if (load.empty()) throw ConfigError("no training hours to fit the discretizer on");
  BatteryDiscretizer d;
  for (std::size_t k = 0; k < 3; ++k)
    d.load_edges[k] = empirical_percentile(load, 0.25 * static_cast<double>(k + 1));
  if (pv.empty()) {
    d.pv_edges = {0.0, 0.0};
  } else {
    d.pv_edges[0] = empirical_percentile(pv, 1.0 / 3.0);
    d.pv_edges[1] = empirical_percentile(pv, 2.0 / 3.0);
  }
  return d;
}

std::size_t BatteryDiscretizer::load_bin(double load_kw) const {
  std::size_t b = 0;
  while (b < load_edges.size() && load_kw > load_edges[b]) ++b;
  return b;
}

std::size_t BatteryDiscretizer::pv_bin(double pv_kw) const {
  if (pv_kw <= 0.0) return 0;
  std::size_t b = 1;
  while (b - 1 < pv_edges.size() && pv_kw > pv_edges[b - 1]) ++b;
  return b;
}

std::size_t BatteryDiscretizer::key(const BatteryState& s) const {
  const auto hour = static_cast<std::size_t>(s.hour);
  const auto level = static_cast<std::size_t>(soc_level(s.soc));
  return ((hour * 11 + level) * 4 + load_bin(s.p_load)) * 4 + pv_bin(s.p_pv);
}

std::size_t BatteryTabularEnv::reset(Rng& rng) {
  env_.reset(rng);
  return disc_.key(env_.state());
}

TabularStep BatteryTabularEnv::step(std::size_t action) {
  const auto res = env_.step(action);
  return {disc_.key(env_.state()), res.reward, res.done};
}

}  // namespace farm
