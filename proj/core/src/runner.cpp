#include "farm/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "farm/agents/dqn.hpp"
#include "farm/agents/ppo.hpp"
#include "farm/agents/rule_based.hpp"
#include "farm/agents/sac.hpp"
#include "farm/agents/tabular.hpp"
#include "farm/errors.hpp"
#include "farm/neural/checkpoint.hpp"

namespace farm {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

TimeSeriesYear load_data(const RunConfig& config) {
  if (config.data_path) return load_csv(*config.data_path);
  SyntheticSpec spec;
  spec.seed = config.data_seed;
  return generate_synthetic(spec);
}

bool uses_forecast(const RunConfig& config) {
  if (config.env != EnvKind::heater) return false;
  switch (config.agent) {
    case AgentKind::fppo:
    case AgentKind::pidkl:
      return true;
    case AgentKind::sac:
      return config.sac_forecast;
    default:
      return false;
  }
}

std::unique_ptr<DiscreteEnv> make_env(const RunConfig& config, const TimeSeriesYear& year) {
  if (config.env == EnvKind::battery)
    return std::make_unique<BatteryEnv>(year, config.split, config.battery);
  std::optional<HeaterForecastSetup> forecast;
  if (uses_forecast(config)) forecast = HeaterForecastSetup{config.forecast_mode};
  return std::make_unique<HeaterEnv>(year, config.split, config.heater, forecast);
}

namespace {

EncoderSpec encoder_spec(const RunConfig& config, const ObservationLayout& layout) {
  EncoderSpec spec;
  spec.layout = layout;
  spec.trunk = config.network.trunk;
  spec.gru_hidden = config.network.gru_hidden;
  spec.gru_dropout = config.network.gru_dropout;
  return spec;
}

/// Steps taken by the agent for this run (the [run] steps override wins).
template <typename Cfg>
Cfg with_steps(Cfg cfg, const RunConfig& config) {
  cfg.total_steps = config.total_steps();
  return cfg;
}

class NetPolicy : public Policy {
 public:
  template <typename A>
  explicit NetPolicy(std::unique_ptr<A> agent)
      : agent_(std::move(agent)),
        train_([a = static_cast<A*>(agent_.get())](DiscreteEnv& env, const StatsSink& sink) {
          return a->train(env, sink);
        }) {}

  std::size_t act(const DiscreteEnv&, const std::vector<double>& obs) override {
    return agent_->act(obs);
  }
  TrainSummary train(DiscreteEnv& env, const StatsSink& sink) override { return train_(env, sink); }
  nn::ParamList params() override { return agent_->params(); }

 private:
  std::unique_ptr<Agent> agent_;
  std::function<TrainSummary(DiscreteEnv&, const StatsSink&)> train_;
};

/// Heater seen as a table: state = hour x remaining run time (clamped).
class HeaterTabularEnv : public TabularEnv {
 public:
  explicit HeaterTabularEnv(HeaterEnv& env) : env_(env) {}
  static std::size_t key(const HeaterState& s, const HeaterParams& p) {
    const int rt = std::clamp(s.run_time, 0, p.daily_runtime_h);
    return static_cast<std::size_t>(s.hour) * static_cast<std::size_t>(p.daily_runtime_h + 1) +
           static_cast<std::size_t>(rt);
  }
  std::size_t state_count() const override {
    return 24 * static_cast<std::size_t>(env_.params().daily_runtime_h + 1);
  }
  std::size_t action_count() const override { return kHeaterActionCount; }
  std::size_t reset(Rng& rng) override {
    env_.reset(rng);
    return key(env_.state(), env_.params());
  }
  TabularStep step(std::size_t action) override {
    const auto out = env_.step(action);
    return {key(env_.state(), env_.params()), out.reward, out.done};
  }

 private:
  HeaterEnv& env_;
};

class QTablePolicy : public Policy {
 public:
  QTablePolicy(const RunConfig& config, const TimeSeriesYear& year, std::size_t states,
               std::size_t actions, std::uint64_t seed)
      : agent_(states, actions, with_steps(config.qtable, config), seed) {
    if (config.env == EnvKind::battery)
      disc_ = BatteryDiscretizer::fit(year, config.split.train_months);
    table_.name = "qtable";
    table_.value = nn::Matrix::Zero(static_cast<Eigen::Index>(states),
                                    static_cast<Eigen::Index>(actions));
    table_.grad = table_.value;
  }

  std::size_t act(const DiscreteEnv& env, const std::vector<double>&) override {
    std::size_t state = 0;
    if (const auto* b = dynamic_cast<const BatteryEnv*>(&env)) {
      state = disc_->key(b->state());
    } else {
      const auto& h = dynamic_cast<const HeaterEnv&>(env);
      state = HeaterTabularEnv::key(h.state(), h.params());
    }
    // Greedy over the checkpointed table; ties go to the lowest index.
    Eigen::Index best = 0;
    table_.value.row(static_cast<Eigen::Index>(state)).maxCoeff(&best);
    return static_cast<std::size_t>(best);
  }

  TrainSummary train(DiscreteEnv& env, const StatsSink& sink) override {
    TrainSummary out;
    if (auto* b = dynamic_cast<BatteryEnv*>(&env)) {
      BatteryTabularEnv tab(*b, *disc_);
      out = agent_.train(tab, sink);
    } else {
      HeaterTabularEnv tab(dynamic_cast<HeaterEnv&>(env));
      out = agent_.train(tab, sink);
    }
    sync_to_param();
    return out;
  }

  nn::ParamList params() override { return {&table_}; }

 private:
  void sync_to_param() {
    const auto& t = agent_.table();
    for (std::size_t s = 0; s < agent_.states(); ++s)
      for (std::size_t a = 0; a < agent_.actions(); ++a)
        table_.value(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
            t[s * agent_.actions() + a];
  }

  QTableAgent agent_;
  std::optional<BatteryDiscretizer> disc_;
  nn::Param table_;
};

class FixedPolicy : public Policy {
 public:
  TrainSummary train(DiscreteEnv&, const StatsSink&) override { return {}; }
  nn::ParamList params() override { return {}; }
};

class IdleBattery : public FixedPolicy {
 public:
  std::size_t act(const DiscreteEnv&, const std::vector<double>&) override {
    return static_cast<std::size_t>(BatteryAction::Idle);
  }
};

class NaiveHeater : public FixedPolicy {
 public:
  std::size_t act(const DiscreteEnv& env, const std::vector<double>&) override {
    const auto& h = dynamic_cast<const HeaterEnv&>(env);
    const auto& p = h.params();
    const int start = p.desired_windows.empty() ? 0 : p.desired_windows.front().begin;
    const bool on = h.state().hour >= start && h.state().run_time > 0;
    return static_cast<std::size_t>(on ? HeaterAction::On : HeaterAction::Off);
  }
};

class RuleBattery : public FixedPolicy {
 public:
  RuleBattery(TariffBounds tariff, BatteryParams params) : tariff_(tariff), params_(params) {}
  std::size_t act(const DiscreteEnv& env, const std::vector<double>&) override {
    const auto& b = dynamic_cast<const BatteryEnv&>(env);
    return static_cast<std::size_t>(rule_based_battery(b.state(), b.current_price(), params_, tariff_));
  }

 private:
  TariffBounds tariff_;
  BatteryParams params_;
};

}  // namespace

std::unique_ptr<Policy> make_baseline_policy(EnvKind env) {
  if (env == EnvKind::battery) return std::make_unique<IdleBattery>();
  return std::make_unique<NaiveHeater>();
}

std::unique_ptr<Policy> make_rule_policy(const TimeSeriesYear& year, const BatteryParams& params) {
  return std::make_unique<RuleBattery>(TariffBounds::of(year), params);
}

std::unique_ptr<Policy> make_policy(const RunConfig& config, const TimeSeriesYear& year,
                                    const DiscreteEnv& env, std::uint64_t seed) {
  const auto layout = env.layout();
  const auto actions = env.action_count();
  switch (config.agent) {
    case AgentKind::ppo:
    case AgentKind::fppo:
    case AgentKind::pidkl: {
      PpoArch arch{encoder_spec(config, layout), config.network.shared_encoder};
      return std::make_unique<NetPolicy>(std::make_unique<PpoAgent>(
          layout, actions, with_steps(config.ppo_for_agent(), config), arch, seed));
    }
    case AgentKind::dqn:
      return std::make_unique<NetPolicy>(std::make_unique<DqnAgent>(
          layout, actions, with_steps(config.dqn, config), encoder_spec(config, layout), seed));
    case AgentKind::sac:
      return std::make_unique<NetPolicy>(std::make_unique<SacAgent>(
          layout, actions, with_steps(config.sac, config), encoder_spec(config, layout), seed));
    case AgentKind::qtable: {
      std::size_t states = BatteryDiscretizer::kStates;
      if (const auto* h = dynamic_cast<const HeaterEnv*>(&env))
        states = 24 * static_cast<std::size_t>(h->params().daily_runtime_h + 1);
      return std::make_unique<QTablePolicy>(config, year, states, actions, seed);
    }
    case AgentKind::rule:
      if (config.env == EnvKind::battery) return make_rule_policy(year, config.battery);
      return make_baseline_policy(EnvKind::heater);
  }
  throw ConfigError("unknown agent");
}

RunReport evaluate_policy(Policy& policy, DiscreteEnv& env, const RunConfig& config,
                          const std::string& agent_tag, std::uint64_t seed) {
  std::vector<HourlyRecord> hours;
  std::vector<DayLedger> days;
  auto record = [&hours](const HourOutcome& o) {
    HourlyRecord h;
    h.index = o.index;
    h.month = o.month;
    h.hour = o.hour;
    h.grid_import_kwh = o.grid_import_kwh;
    h.price = o.price;
    h.cost = o.price * o.grid_import_kwh;
    h.action = static_cast<int>(o.action);
    h.soc = o.soc;
    h.device_kw = o.device_kw;
    hours.push_back(h);
  };

  if (auto* b = dynamic_cast<BatteryEnv*>(&env)) {
    for (const auto& ep : b->episodes(Role::test)) {
      auto obs = b->reset_to(ep);
      bool done = false;
      while (!done) {
        auto out = b->step(policy.act(*b, obs));
        record(b->last());
        obs = std::move(out.obs);
        done = out.done;
      }
    }
  } else {
    auto& h = dynamic_cast<HeaterEnv&>(env);
    for (const auto& ep : h.episodes(Role::test)) {
      auto obs = h.reset_to(ep);
      bool done = false;
      while (!done) {
        auto out = h.step(policy.act(h, obs));
        record(h.last());
        if (h.closed_day()) days.push_back(*h.closed_day());
        obs = std::move(out.obs);
        done = out.done;
      }
    }
  }
  return RunReport(to_string(config.env), agent_tag, seed, std::move(hours), std::move(days));
}

RunReport baseline_report(const RunConfig& config, const TimeSeriesYear& year) {
  RunConfig base = config;
  base.agent = config.env == EnvKind::battery ? AgentKind::rule : AgentKind::ppo;
  auto env = make_env(base, year);
  auto policy = make_baseline_policy(config.env);
  return evaluate_policy(*policy, *env, config, "baseline", 0);
}

fs::path output_root(const RunConfig& config) {
  if (const char* env = std::getenv("FARM_DISPATCH_OUT"); env && *env) return env;
  return config.output_dir;
}

fs::path run_directory(const RunConfig& config, std::uint64_t seed) {
  return output_root(config) / to_string(config.agent) / std::to_string(seed);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::string stats_line(const StatsRecord& r) {
  ojson j;
  j["kind"] = r.kind;
  j["step"] = r.step;
  for (const auto& [k, v] : r.fields) j[k] = v;
  return j.dump();
}

}  // namespace

void write_report(const RunReport& report, const PeakProfile& base, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "monthly.csv");
    out << "month,import_kwh,cost,peak_kw,satisfaction\n";
    for (const auto& m : report.monthly())
      out << m.month << ',' << format_number(m.import_kwh) << ',' << format_number(m.cost) << ','
          << format_number(m.peak_kw) << ','
          << (m.satisfaction ? format_number(*m.satisfaction) : std::string()) << '\n';
  }
  {
    const auto sched = peak_profile(report.hours());
    auto out = open_out(dir / "profile.csv");
    out << "hour,base_kw,scheduled_kw\n";
    for (std::size_t h = 0; h < 24; ++h)
      out << h << ',' << format_number(base.kw[h]) << ',' << format_number(sched.kw[h]) << '\n';
  }
  {
    auto out = open_out(dir / "hourly.csv");
    out << "index,month,hour,action,grid_import_kwh,price,cost,soc,device_kw\n";
    for (const auto& h : report.hours())
      out << h.index << ',' << h.month << ',' << h.hour << ',' << h.action << ','
          << format_number(h.grid_import_kwh) << ',' << format_number(h.price) << ','
          << format_number(h.cost) << ',' << format_number(h.soc) << ','
          << format_number(h.device_kw) << '\n';
  }
  if (!report.days().empty()) {
    auto out = open_out(dir / "days.csv");
    out << "day,on_hours,run_time_end,met,on_hours_in_window\n";
    for (const auto& d : report.days())
      out << d.day_index << ',' << d.on_hours_taken << ',' << d.run_time_end_of_day << ','
          << (d.met ? 1 : 0) << ',' << d.on_hours_in_window << '\n';
  }
}

void write_run_metadata(const RunConfig& config, const RunReport& report, std::uint64_t seed,
                        const fs::path& dir) {
  ojson j;
  j["env"] = to_string(config.env);
  j["agent"] = to_string(config.agent);
  j["seed"] = seed;
  j["train_months"] = format_month_list(config.split.train_months);
  j["test_months"] = format_month_list(config.split.test_months);
  j["spec_hash"] = config.spec_hash();
  j["steps"] = config.total_steps();
  j["total_cost"] = total_cost(report);
  j["total_import_kwh"] = total_import(report);
  j["peak_kw"] = peak_profile(report.hours()).peak();
  if (!report.days().empty()) {
    j["satisfaction"] = satisfaction_rate(report.days());
    j["window_adherence"] = window_adherence(report.days());
  }
  auto out = open_out(dir / "run.json");
  out << j.dump(2) << '\n';
}

TrainResult train_run(const RunConfig& config, const TimeSeriesYear& year, std::uint64_t seed,
                      const fs::path& dir) {
  config.validate();
  fs::create_directories(dir);
  auto env = make_env(config, year);
  auto policy = make_policy(config, year, *env, seed);

  TrainSummary summary;
  {
    auto log = open_out(dir / "stats.ndjson");
    summary = policy->train(*env, [&log](const StatsRecord& r) { log << stats_line(r) << '\n'; });
  }
  nn::save_checkpoint(dir / "checkpoint.bin", policy->params(), config.spec_hash());
  {
    auto out = open_out(dir / "config.ini");
    RunConfig frozen = config;
    frozen.seeds = {seed};
    out << frozen.to_ini();
  }

  auto report = evaluate_policy(*policy, *env, config, to_string(config.agent), seed);
  const auto base = baseline_report(config, year);
  write_report(report, peak_profile(base.hours()), dir);
  write_run_metadata(config, report, seed, dir);
  return {dir, std::move(summary), std::move(report)};
}

RunReport evaluate_run(const RunConfig& config, const TimeSeriesYear& year, std::uint64_t seed,
                       const fs::path& checkpoint) {
  config.validate();
  auto env = make_env(config, year);
  auto policy = make_policy(config, year, *env, seed);
  nn::load_checkpoint(checkpoint, policy->params(), config.spec_hash());
  return evaluate_policy(*policy, *env, config, to_string(config.agent), seed);
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double cell_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ValidationError("bad number '" + s + "'");
  return v;
}

long cell_long(const std::string& s) { return static_cast<long>(cell_double(s)); }

}  // namespace

StoredReport read_report(const fs::path& dir) {
  std::ifstream meta_in(dir / "run.json");
  if (!meta_in) throw ConfigError("no run.json in " + dir.string());
  const auto meta = nlohmann::json::parse(meta_in);

  std::vector<HourlyRecord> hours;
  for (const auto& r : read_csv_rows(dir / "hourly.csv")) {
    if (r.size() < 9) throw ValidationError("short row in " + (dir / "hourly.csv").string());
    HourlyRecord h;
    h.index = static_cast<std::size_t>(cell_long(r[0]));
    h.month = static_cast<int>(cell_long(r[1]));
    h.hour = static_cast<int>(cell_long(r[2]));
    h.action = static_cast<int>(cell_long(r[3]));
    h.grid_import_kwh = cell_double(r[4]);
    h.price = cell_double(r[5]);
    h.cost = cell_double(r[6]);
    h.soc = cell_double(r[7]);
    h.device_kw = cell_double(r[8]);
    hours.push_back(h);
  }
  std::vector<DayLedger> days;
  if (fs::exists(dir / "days.csv")) {
    for (const auto& r : read_csv_rows(dir / "days.csv")) {
      if (r.size() < 5) throw ValidationError("short row in " + (dir / "days.csv").string());
      DayLedger d;
      d.day_index = static_cast<std::size_t>(cell_long(r[0]));
      d.on_hours_taken = static_cast<int>(cell_long(r[1]));
      d.run_time_end_of_day = static_cast<int>(cell_long(r[2]));
      d.met = cell_long(r[3]) != 0;
      d.on_hours_in_window = static_cast<int>(cell_long(r[4]));
      days.push_back(d);
    }
  }
  std::optional<std::vector<MonthlyAggregate>> monthly;
  if (fs::exists(dir / "monthly.csv")) {
    monthly.emplace();
    for (const auto& r : read_csv_rows(dir / "monthly.csv")) {
      MonthlyAggregate m;
      m.month = static_cast<int>(cell_long(r.at(0)));
      m.import_kwh = cell_double(r.at(1));
      m.cost = cell_double(r.at(2));
      monthly->push_back(m);
    }
  }
  const std::string agent = meta.at("agent").get<std::string>();
  const auto seed = meta.at("seed").get<std::uint64_t>();
  StoredReport out{agent + "/" + std::to_string(seed), meta.at("env").get<std::string>(),
                   meta.at("train_months").get<std::string>() + "|" +
                       meta.at("test_months").get<std::string>(),
                   RunReport(meta.at("env").get<std::string>(), agent, seed, std::move(hours),
                             std::move(days), std::move(monthly))};
  return out;
}

std::vector<ComparisonRow> compare_reports(const std::vector<StoredReport>& reports) {
  if (reports.size() < 2) throw ConfigError("compare needs at least two reports");
  for (const auto& r : reports) {
    if (r.env != reports.front().env)
      throw ConfigError("reports mix environments: " + reports.front().label + " is " +
                        reports.front().env + ", " + r.label + " is " + r.env);
    if (r.split != reports.front().split)
      throw ConfigError("reports use different splits: " + reports.front().label + " (" +
                        reports.front().split + ") vs " + r.label + " (" + r.split + ")");
  }
  using Getter = double (*)(const MonthlyAggregate&);
  const std::vector<std::pair<std::string, Getter>> metrics = {
      {"cost", [](const MonthlyAggregate& m) { return m.cost; }},
      {"import_kwh", [](const MonthlyAggregate& m) { return m.import_kwh; }},
      {"peak_kw", [](const MonthlyAggregate& m) { return m.peak_kw; }}};

  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      const auto& a = reports[i].report.monthly();
      const auto& b = reports[j].report.monthly();
      if (a.size() != b.size()) throw ConfigError("reports cover different months");
      for (const auto& [name, get] : metrics) {
        std::vector<double> diffs;
        for (std::size_t k = 0; k < a.size(); ++k) {
          if (a[k].month != b[k].month) throw ConfigError("reports cover different months");
          diffs.push_back(get(b[k]) - get(a[k]));
        }
        ComparisonRow row;
        row.comparison = reports[i].label + " vs " + reports[j].label;
        row.metric = name;
        row.median_improvement = median(diffs);
        try {
          const auto w = wilcoxon_signed_rank(diffs);
          row.p_value = w.p_value;
          row.n = w.n;
        } catch (const DegenerateError&) {
          row.n = 0;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_stats_csv(const std::vector<ComparisonRow>& rows, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto out = open_out(path);
  out << "comparison,metric,p_value,median_improvement,n\n";
  for (const auto& r : rows)
    out << r.comparison << ',' << r.metric << ','
        << (r.p_value ? format_number(*r.p_value) : std::string("n/a")) << ','
        << format_number(r.median_improvement) << ',' << r.n << '\n';
}

}  // namespace farm
