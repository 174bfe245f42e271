#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "farm/agents/dqn.hpp"
#include "farm/agents/ppo.hpp"
#include "farm/agents/sac.hpp"
#include "farm/agents/tabular.hpp"
#include "farm/battery_env.hpp"
#include "farm/forecast.hpp"
#include "farm/heater_env.hpp"
#include "farm/timeseries.hpp"

namespace farm {

enum class EnvKind { battery, heater };
enum class AgentKind { ppo, fppo, pidkl, dqn, sac, qtable, rule };

EnvKind parse_env_kind(const std::string& text);
AgentKind parse_agent_kind(const std::string& text);
const char* to_string(EnvKind env);
const char* to_string(AgentKind agent);

/// Raw `[section] key = value` content, keys kept in file order per section.
using IniSections = std::map<std::string, std::map<std::string, std::string>>;

/// Parses the plain-text config format. `#` and `;` start comments.
IniSections parse_ini(std::istream& in, const std::string& origin = "<config>");

struct NetworkConfig {
  std::vector<Eigen::Index> trunk{64, 64};
  Eigen::Index gru_hidden = 32;
  double gru_dropout = 0.10;
  bool shared_encoder = true;  // PPO family: one encoder feeds actor and critic heads
};

struct RunConfig {
  EnvKind env = EnvKind::heater;
  AgentKind agent = AgentKind::ppo;
  std::optional<std::string> data_path;  // CSV; synthetic when empty
  std::uint64_t data_seed = 1;
  SplitSpec split = SplitSpec::heater_default();
  std::vector<std::uint64_t> seeds{1};
  std::optional<long> steps;  // overrides every agent's total_steps
  std::filesystem::path output_dir = "runs";
  bool force = false;

  BatteryParams battery;
  HeaterParams heater;
  ForecastMode forecast_mode = ForecastMode::all;
  NetworkConfig network;
  PpoConfig ppo = PpoConfig::heater();
  PpoConfig fppo = PpoConfig::heater();
  PpoConfig pidkl = PpoConfig::heater();
  DqnConfig dqn;
  SacConfig sac;
  bool sac_forecast = true;
  QTableConfig qtable;

  /// Defaults for `env`, then every section of `ini` applied on top.
  static RunConfig from_ini(const IniSections& ini);
  static RunConfig load(const std::filesystem::path& path);
  static RunConfig defaults(EnvKind env, AgentKind agent);

  /// Applies one `section.key=value` override.
  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Throws ConfigError on invalid values or an agent/env pairing outside
  /// the supported experiments (unless `force`).
  void validate() const;

  long total_steps() const;
  const PpoConfig& ppo_for_agent() const;
  /// Canonical text of everything that shapes a checkpoint.
  std::string canonical_spec() const;
  std::uint64_t spec_hash() const;
  /// Serialised config that reproduces this run.
  std::string to_ini() const;
};

/// "1..5", "1,3,7" or "4".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<HourRange> parse_hour_ranges(const std::string& text);
std::string format_hour_ranges(const std::vector<HourRange>& ranges);

}  // namespace farm
