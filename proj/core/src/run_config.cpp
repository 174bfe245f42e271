#include "farm/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "farm/errors.hpp"
#include "farm/neural/checkpoint.hpp"

namespace farm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  // Accept 1e6 style values as long as they are integral.
  const double d = to_double(key, v);
  if (d != static_cast<double>(static_cast<long>(d)))
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string num(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string flag(bool b) { return b ? "true" : "false"; }

void set_ppo(PpoConfig& c, const std::string& section, const std::string& key, const std::string& v) {
  const std::string k = section + "." + key;
  if (key == "lr") c.lr = to_double(k, v);
  else if (key == "gamma") c.gamma = to_double(k, v);
  else if (key == "clip") c.clip = to_double(k, v);
  else if (key == "minibatch") c.minibatch = static_cast<std::size_t>(to_long(k, v));
  else if (key == "total_steps") c.total_steps = to_long(k, v);
  else if (key == "rollout_len") c.rollout_len = static_cast<std::size_t>(to_long(k, v));
  else if (key == "epochs") c.epochs = static_cast<int>(to_long(k, v));
  else if (key == "gae_lambda") c.gae_lambda = to_double(k, v);
  else if (key == "entropy_coef") c.entropy_coef = to_double(k, v);
  else if (key == "value_coef") c.value_coef = to_double(k, v);
  else if (key == "grad_clip") c.grad_clip = to_double(k, v);
  else if (key == "target_kl") c.target_kl = to_double(k, v);
  else if (key == "anneal_lr") c.anneal_lr = to_bool(k, v);
  else if (key == "kp") c.pid.kp = to_double(k, v);
  else if (key == "ki") c.pid.ki = to_double(k, v);
  else if (key == "kd") c.pid.kd = to_double(k, v);
  else if (key == "c_kl_init") c.pid.c_kl = to_double(k, v);
  else if (key == "pid_target_kl") c.pid.target_kl = to_double(k, v);
  else throw ConfigError("unknown key " + k);
}

void emit_ppo(std::ostream& out, const std::string& name, const PpoConfig& c, bool pid) {
  out << "[" << name << "]\n"
      << "lr = " << num(c.lr) << "\ngamma = " << num(c.gamma) << "\nclip = " << num(c.clip)
      << "\nminibatch = " << c.minibatch << "\ntotal_steps = " << c.total_steps
      << "\nrollout_len = " << c.rollout_len << "\nepochs = " << c.epochs
      << "\ngae_lambda = " << num(c.gae_lambda) << "\nentropy_coef = " << num(c.entropy_coef)
      << "\nvalue_coef = " << num(c.value_coef) << "\ngrad_clip = " << num(c.grad_clip)
      << "\ntarget_kl = " << num(c.target_kl) << "\nanneal_lr = " << flag(c.anneal_lr) << "\n";
  if (pid)
    out << "kp = " << num(c.pid.kp) << "\nki = " << num(c.pid.ki) << "\nkd = " << num(c.pid.kd)
        << "\nc_kl_init = " << num(c.pid.c_kl) << "\npid_target_kl = " << num(c.pid.target_kl)
        << "\n";
  out << "\n";
}

}  // namespace

EnvKind parse_env_kind(const std::string& t) {
  if (t == "battery") return EnvKind::battery;
  if (t == "heater") return EnvKind::heater;
  throw ConfigError("env must be 'battery' or 'heater', got '" + t + "'");
}

AgentKind parse_agent_kind(const std::string& t) {
  static const std::map<std::string, AgentKind> kinds = {
      {"ppo", AgentKind::ppo},   {"fppo", AgentKind::fppo},     {"pidkl", AgentKind::pidkl},
      {"dqn", AgentKind::dqn},   {"sac", AgentKind::sac},       {"qtable", AgentKind::qtable},
      {"rule", AgentKind::rule}};
  const auto it = kinds.find(t);
  if (it == kinds.end())
    throw ConfigError("agent must be one of ppo, fppo, pidkl, dqn, sac, qtable, rule; got '" + t + "'");
  return it->second;
}

const char* to_string(EnvKind e) { return e == EnvKind::battery ? "battery" : "heater"; }

const char* to_string(AgentKind a) {
  switch (a) {
    case AgentKind::ppo: return "ppo";
    case AgentKind::fppo: return "fppo";
    case AgentKind::pidkl: return "pidkl";
    case AgentKind::dqn: return "dqn";
    case AgentKind::sac: return "sac";
    case AgentKind::qtable: return "qtable";
    case AgentKind::rule: return "rule";
  }
  return "?";
}

IniSections parse_ini(std::istream& in, const std::string& origin) {
  IniSections out;
  std::string section = "run";
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    out[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split_list(text, ',')) {
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots != std::string::npos) {
      const long a = to_long("seeds", part.substr(0, dots));
      const long b = to_long("seeds", part.substr(dots + 2));
      if (a < 0 || b < a) throw ConfigError("invalid seed range '" + part + "'");
      for (long s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    } else {
      const long s = to_long("seeds", part);
      if (s < 0) throw ConfigError("seeds must be non-negative");
      out.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

std::vector<HourRange> parse_hour_ranges(const std::string& text) {
  std::vector<HourRange> out;
  for (const auto& part : split_list(text, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-');
    if (dash == std::string::npos) throw ConfigError("hour range must look like 4-10, got '" + part + "'");
    const HourRange r{static_cast<int>(to_long("hours", part.substr(0, dash))),
                      static_cast<int>(to_long("hours", part.substr(dash + 1)))};
    if (r.begin < 0 || r.end > 24 || r.begin >= r.end)
      throw ConfigError("hour range '" + part + "' must satisfy 0 <= begin < end <= 24");
    out.push_back(r);
  }
  return out;
}

std::string format_hour_ranges(const std::vector<HourRange>& ranges) {
  std::string out;
  for (const auto& r : ranges) {
    if (!out.empty()) out += ',';
    out += std::to_string(r.begin) + "-" + std::to_string(r.end);
  }
  return out;
}

RunConfig RunConfig::defaults(EnvKind env, AgentKind agent) {
  RunConfig c;
  c.env = env;
  c.agent = agent;
  if (env == EnvKind::battery) {
    c.split = SplitSpec::battery_default();
    c.ppo = c.fppo = c.pidkl = PpoConfig::battery();
  }
  c.pidkl.trust = TrustRegion::pid_kl;
  return c;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& v) {
  const std::string k = section + "." + key;
  if (section == "run") {
    if (key == "env" || key == "agent") return;  // resolved before defaults
    if (key == "data") {
      if (v.rfind("synthetic", 0) == 0) {
        data_path.reset();
        const auto colon = v.find(':');
        if (colon != std::string::npos)
          data_seed = static_cast<std::uint64_t>(to_long(k, v.substr(colon + 1)));
      } else {
        data_path = v;
      }
    } else if (key == "seeds") seeds = parse_seed_list(v);
    else if (key == "steps") steps = to_long(k, v);
    else if (key == "output") output_dir = v;
    else if (key == "force") force = to_bool(k, v);
    else throw ConfigError("unknown key " + k);
  } else if (section == "split") {
    if (key == "train") split.train_months = parse_month_list(v);
    else if (key == "test") split.test_months = parse_month_list(v);
    else throw ConfigError("unknown key " + k);
  } else if (section == "battery") {
    if (key == "capacity_kwh") battery.capacity_kwh = to_double(k, v);
    else if (key == "rate_kw") battery.rate_kw = to_double(k, v);
    else if (key == "soc_min") battery.soc_min = to_double(k, v);
    else if (key == "soc_max") battery.soc_max = to_double(k, v);
    else if (key == "penalty") battery.penalty = to_double(k, v);
    else if (key == "initial_soc") battery.initial_soc = to_double(k, v);
    else if (key == "clamp_export") battery.clamp_export = to_bool(k, v);
    else throw ConfigError("unknown key " + k);
  } else if (section == "heater") {
    if (key == "device_kw") heater.device_kw = to_double(k, v);
    else if (key == "daily_runtime_h") heater.daily_runtime_h = static_cast<int>(to_long(k, v));
    else if (key == "desired_windows") heater.desired_windows = parse_hour_ranges(v);
    else if (key == "task_alpha") heater.task_alpha = to_double(k, v);
    else if (key == "daily_penalty") heater.daily_penalty_mag = to_double(k, v);
    else if (key == "weights.alpha") heater.alpha_weight = to_double(k, v);
    else if (key == "weights.beta") heater.beta_weight = to_double(k, v);
    else if (key == "clamp_export") heater.clamp_export = to_bool(k, v);
    else if (key == "overuse") {
      if (v == "block") heater.overuse = OverusePolicy::block;
      else if (v == "track") heater.overuse = OverusePolicy::track;
      else throw ConfigError(k + " must be 'block' or 'track'");
    } else throw ConfigError("unknown key " + k);
  } else if (section == "forecast") {
    if (key == "mode") forecast_mode = parse_forecast_mode(v);
    else throw ConfigError("unknown key " + k);
  } else if (section == "network") {
    if (key == "trunk") {
      network.trunk.clear();
      for (const auto& w : split_list(v, ',')) network.trunk.push_back(to_long(k, w));
    } else if (key == "gru_hidden") network.gru_hidden = to_long(k, v);
    else if (key == "gru_dropout") network.gru_dropout = to_double(k, v);
    else if (key == "shared_encoder") network.shared_encoder = to_bool(k, v);
    else throw ConfigError("unknown key " + k);
  } else if (section == "ppo") {
    set_ppo(ppo, section, key, v);
  } else if (section == "fppo") {
    set_ppo(fppo, section, key, v);
  } else if (section == "pidkl") {
    set_ppo(pidkl, section, key, v);
  } else if (section == "dqn") {
    if (key == "lr") dqn.lr = to_double(k, v);
    else if (key == "gamma") dqn.gamma = to_double(k, v);
    else if (key == "eps_start") dqn.eps_start = to_double(k, v);
    else if (key == "eps_end") dqn.eps_end = to_double(k, v);
    else if (key == "eps_decay_fraction") dqn.eps_decay_fraction = to_double(k, v);
    else if (key == "buffer") dqn.buffer = static_cast<std::size_t>(to_long(k, v));
    else if (key == "batch") dqn.batch = static_cast<std::size_t>(to_long(k, v));
    else if (key == "total_steps") dqn.total_steps = to_long(k, v);
    else if (key == "target_sync_steps") dqn.target_sync_steps = to_long(k, v);
    else if (key == "learning_starts") dqn.learning_starts = to_long(k, v);
    else if (key == "train_frequency") dqn.train_frequency = to_long(k, v);
    else throw ConfigError("unknown key " + k);
  } else if (section == "sac") {
    if (key == "lr") sac.lr = to_double(k, v);
    else if (key == "gamma") sac.gamma = to_double(k, v);
    else if (key == "buffer") sac.buffer = static_cast<std::size_t>(to_long(k, v));
    else if (key == "batch") sac.batch = static_cast<std::size_t>(to_long(k, v));
    else if (key == "tau") sac.tau = to_double(k, v);
    else if (key == "target_entropy_scale") sac.target_entropy_scale = to_double(k, v);
    else if (key == "gru_dropout") sac.gru_dropout = to_double(k, v);
    else if (key == "total_steps") sac.total_steps = to_long(k, v);
    else if (key == "learning_starts") sac.learning_starts = to_long(k, v);
    else if (key == "update_frequency") sac.update_frequency = to_long(k, v);
    else if (key == "initial_alpha") sac.initial_alpha = to_double(k, v);
    else if (key == "autotune") sac.autotune = to_bool(k, v);
    else if (key == "forecast") sac_forecast = to_bool(k, v);
    else throw ConfigError("unknown key " + k);
  } else if (section == "qtable") {
    if (key == "lr") qtable.lr = to_double(k, v);
    else if (key == "gamma") qtable.gamma = to_double(k, v);
    else if (key == "eps_start") qtable.eps_start = to_double(k, v);
    else if (key == "eps_end") qtable.eps_end = to_double(k, v);
    else if (key == "eps_decrement") qtable.eps_decrement = to_double(k, v);
    else if (key == "total_steps") qtable.total_steps = to_long(k, v);
    else throw ConfigError("unknown key " + k);
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

RunConfig RunConfig::from_ini(const IniSections& ini) {
  EnvKind env = EnvKind::heater;
  AgentKind agent = AgentKind::ppo;
  if (auto it = ini.find("run"); it != ini.end()) {
    if (auto e = it->second.find("env"); e != it->second.end()) env = parse_env_kind(e->second);
    if (auto a = it->second.find("agent"); a != it->second.end()) agent = parse_agent_kind(a->second);
  }
  RunConfig c = defaults(env, agent);
  for (const auto& [section, keys] : ini)
    for (const auto& [key, value] : keys) c.set(section, key, value);
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return from_ini(parse_ini(in, path.string()));
}

void RunConfig::validate() const {
  split.validate();
  if (split.train_months.empty()) throw ConfigError("split.train is empty");
  battery.validate();
  heater.validate();
  ppo.validate();
  fppo.validate();
  pidkl.validate();
  dqn.validate();
  sac.validate();
  qtable.validate();
  if (steps && *steps < 1) throw ConfigError("steps must be positive");
  if (network.gru_hidden < 1) throw ConfigError("network.gru_hidden must be positive");
  if (network.gru_dropout < 0.0 || network.gru_dropout >= 1.0)
    throw ConfigError("network.gru_dropout must lie in [0, 1)");
  if (force) return;
  const bool battery_only = agent == AgentKind::rule || agent == AgentKind::qtable;
  const bool heater_only =
      agent == AgentKind::fppo || agent == AgentKind::pidkl || agent == AgentKind::sac;
  if (battery_only && env != EnvKind::battery)
    throw ConfigError(std::string("agent '") + to_string(agent) +
                      "' is only paired with the battery env (use --force to override)");
  if (heater_only && env != EnvKind::heater)
    throw ConfigError(std::string("agent '") + to_string(agent) +
                      "' is only paired with the heater env (use --force to override)");
}

long RunConfig::total_steps() const {
  if (steps) return *steps;
  switch (agent) {
    case AgentKind::ppo: return ppo.total_steps;
    case AgentKind::fppo: return fppo.total_steps;
    case AgentKind::pidkl: return pidkl.total_steps;
    case AgentKind::dqn: return dqn.total_steps;
    case AgentKind::sac: return sac.total_steps;
    case AgentKind::qtable: return qtable.total_steps;
    case AgentKind::rule: return 0;
  }
  return 0;
}

const PpoConfig& RunConfig::ppo_for_agent() const {
  if (agent == AgentKind::fppo) return fppo;
  if (agent == AgentKind::pidkl) return pidkl;
  return ppo;
}

std::string RunConfig::canonical_spec() const {
  std::ostringstream s;
  s << "env=" << to_string(env) << ";agent=" << to_string(agent)
    << ";train=" << format_month_list(split.train_months)
    << ";forecast=" << to_string(forecast_mode) << ";trunk=";
  for (auto w : network.trunk) s << w << ',';
  s << ";gru=" << network.gru_hidden << ";shared=" << network.shared_encoder
    << ";sac_forecast=" << sac_forecast;
  if (env == EnvKind::battery)
    s << ";battery=" << num(battery.capacity_kwh) << ',' << num(battery.rate_kw) << ','
      << num(battery.soc_min) << ',' << num(battery.soc_max);
  else
    s << ";heater=" << num(heater.device_kw) << ',' << heater.daily_runtime_h;
  return s.str();
}

std::uint64_t RunConfig::spec_hash() const { return nn::fnv1a(canonical_spec()); }

std::string RunConfig::to_ini() const {
  std::ostringstream out;
  out << "[run]\nenv = " << to_string(env) << "\nagent = " << to_string(agent) << "\ndata = ";
  if (data_path) out << *data_path;
  else out << "synthetic:" << data_seed;
  out << "\nseeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << "\n";
  if (steps) out << "steps = " << *steps << "\n";
  out << "force = " << flag(force) << "\n\n";
  out << "[split]\ntrain = " << format_month_list(split.train_months)
      << "\ntest = " << format_month_list(split.test_months) << "\n\n";
  out << "[battery]\ncapacity_kwh = " << num(battery.capacity_kwh)
      << "\nrate_kw = " << num(battery.rate_kw) << "\nsoc_min = " << num(battery.soc_min)
      << "\nsoc_max = " << num(battery.soc_max) << "\npenalty = " << num(battery.penalty)
      << "\ninitial_soc = " << num(battery.initial_soc)
      << "\nclamp_export = " << flag(battery.clamp_export) << "\n\n";
  out << "[heater]\ndevice_kw = " << num(heater.device_kw)
      << "\ndaily_runtime_h = " << heater.daily_runtime_h
      << "\ndesired_windows = " << format_hour_ranges(heater.desired_windows)
      << "\ntask_alpha = " << num(heater.task_alpha)
      << "\ndaily_penalty = " << num(heater.daily_penalty_mag)
      << "\nweights.alpha = " << num(heater.alpha_weight)
      << "\nweights.beta = " << num(heater.beta_weight)
      << "\nclamp_export = " << flag(heater.clamp_export)
      << "\noveruse = " << (heater.overuse == OverusePolicy::block ? "block" : "track") << "\n\n";
  out << "[forecast]\nmode = " << to_string(forecast_mode) << "\n\n";
  out << "[network]\ntrunk = ";
  for (std::size_t i = 0; i < network.trunk.size(); ++i) out << (i ? "," : "") << network.trunk[i];
  out << "\ngru_hidden = " << network.gru_hidden << "\ngru_dropout = " << num(network.gru_dropout)
      << "\nshared_encoder = " << flag(network.shared_encoder) << "\n\n";
  emit_ppo(out, "ppo", ppo, false);
  emit_ppo(out, "fppo", fppo, false);
  emit_ppo(out, "pidkl", pidkl, true);
  out << "[dqn]\nlr = " << num(dqn.lr) << "\ngamma = " << num(dqn.gamma)
      << "\neps_start = " << num(dqn.eps_start) << "\neps_end = " << num(dqn.eps_end)
      << "\neps_decay_fraction = " << num(dqn.eps_decay_fraction) << "\nbuffer = " << dqn.buffer
      << "\nbatch = " << dqn.batch << "\ntotal_steps = " << dqn.total_steps
      << "\ntarget_sync_steps = " << dqn.target_sync_steps
      << "\nlearning_starts = " << dqn.learning_starts
      << "\ntrain_frequency = " << dqn.train_frequency << "\n\n";
  out << "[sac]\nlr = " << num(sac.lr) << "\ngamma = " << num(sac.gamma) << "\nbuffer = " << sac.buffer
      << "\nbatch = " << sac.batch << "\ntau = " << num(sac.tau)
      << "\ntarget_entropy_scale = " << num(sac.target_entropy_scale)
      << "\ngru_dropout = " << num(sac.gru_dropout) << "\ntotal_steps = " << sac.total_steps
      << "\nlearning_starts = " << sac.learning_starts
      << "\nupdate_frequency = " << sac.update_frequency
      << "\ninitial_alpha = " << num(sac.initial_alpha) << "\nautotune = " << flag(sac.autotune)
      << "\nforecast = " << flag(sac_forecast) << "\n\n";
  out << "[qtable]\nlr = " << num(qtable.lr) << "\ngamma = " << num(qtable.gamma)
      << "\neps_start = " << num(qtable.eps_start) << "\neps_end = " << num(qtable.eps_end)
      << "\neps_decrement = " << num(qtable.eps_decrement)
      << "\ntotal_steps = " << qtable.total_steps << "\n";
  return out.str();
}

}  // namespace farm
