#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "farm/agents/agent.hpp"
#include "farm/agents/environment.hpp"
#include "farm/metrics.hpp"
#include "farm/run_config.hpp"

namespace farm {

/// Synthetic year for `config.data_seed`, or the CSV at `config.data_path`.
TimeSeriesYear load_data(const RunConfig& config);

/// Environment the agent of `config` trains and evaluates in. Heater agents
/// fppo, pidkl and (with sac_forecast) sac see the forecast block.
std::unique_ptr<DiscreteEnv> make_env(const RunConfig& config, const TimeSeriesYear& year);
bool uses_forecast(const RunConfig& config);

/// Any trained or fixed policy that can drive an environment greedily.
class Policy {
 public:
  virtual ~Policy() = default;
  /// `env` is the environment the observation came from.
  virtual std::size_t act(const DiscreteEnv& env, const std::vector<double>& obs) = 0;
  /// Trains in `env`; fixed policies return an empty summary.
  virtual TrainSummary train(DiscreteEnv& env, const StatsSink& sink) = 0;
  /// Parameters stored in the checkpoint (empty for fixed policies).
  virtual nn::ParamList params() = 0;
};

/// Fresh policy for (config, seed); `env` must come from make_env(config, ...).
std::unique_ptr<Policy> make_policy(const RunConfig& config, const TimeSeriesYear& year,
                                    const DiscreteEnv& env, std::uint64_t seed);

/// Battery: never charges or discharges. Heater: switches ON from the start
/// of the first desired window until the daily run time is used.
std::unique_ptr<Policy> make_baseline_policy(EnvKind env);

/// Rule-based battery dispatch with the tariff bounds of `year`.
std::unique_ptr<Policy> make_rule_policy(const TimeSeriesYear& year, const BatteryParams& params);

/// Greedy rollout over every test episode.
RunReport evaluate_policy(Policy& policy, DiscreteEnv& env, const RunConfig& config,
                          const std::string& agent_tag, std::uint64_t seed);

RunReport baseline_report(const RunConfig& config, const TimeSeriesYear& year);

/// `FARM_DISPATCH_OUT` when set, else config.output_dir.
std::filesystem::path output_root(const RunConfig& config);
std::filesystem::path run_directory(const RunConfig& config, std::uint64_t seed);

struct TrainResult {
  std::filesystem::path dir;
  TrainSummary summary;
  RunReport report;
};

/// Trains one seed and writes checkpoint.bin, stats.ndjson, config.ini,
/// run.json and the report files into `dir`.
TrainResult train_run(const RunConfig& config, const TimeSeriesYear& year, std::uint64_t seed,
                      const std::filesystem::path& dir);

/// Loads `checkpoint` (spec hash must match `config`) and evaluates it.
RunReport evaluate_run(const RunConfig& config, const TimeSeriesYear& year, std::uint64_t seed,
                       const std::filesystem::path& checkpoint);

/// monthly.csv, profile.csv, hourly.csv and (heater) days.csv.
void write_report(const RunReport& report, const PeakProfile& base,
                  const std::filesystem::path& dir);
void write_run_metadata(const RunConfig& config, const RunReport& report, std::uint64_t seed,
                        const std::filesystem::path& dir);

/// A report directory read back from disk.
struct StoredReport {
  std::string label;  // "<agent>/<seed>"
  std::string env;
  std::string split;  // canonical "train|test" text
  RunReport report;
};

StoredReport read_report(const std::filesystem::path& dir);

struct ComparisonRow {
  std::string comparison;  // "a vs b"
  std::string metric;      // cost, import_kwh, peak_kw
  std::optional<double> p_value;
  double median_improvement = 0.0;  // median of (b - a) over paired months
  std::size_t n = 0;
};

/// Pairwise Wilcoxon tests on monthly cost, import and peak. Throws
/// ConfigError when the reports disagree on env or split.
std::vector<ComparisonRow> compare_reports(const std::vector<StoredReport>& reports);
void write_stats_csv(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path);

/// Shortest round-trip decimal text of `v`.
std::string format_number(double v);

}  // namespace farm
