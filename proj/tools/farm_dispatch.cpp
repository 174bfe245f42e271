#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "farm/errors.hpp"
#include "farm/forecast.hpp"
#include "farm/runner.hpp"

namespace fs = std::filesystem;
using namespace farm;

namespace {

struct RunFlags {
  std::string config_path;
  std::string env;
  std::string agent;
  std::string seeds;
  long steps = 0;
  std::string data;
  std::string out;
  bool force = false;
  std::vector<std::string> overrides;  // section.key=value
  std::string train_months;  // calibrate: training months, the rest become test months
  int jobs = 1;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config file")->check(CLI::ExistingFile);
  cmd->add_option("--env", f.env, "battery | heater");
  cmd->add_option("--agent", f.agent, "ppo | fppo | pidkl | dqn | sac | qtable | rule");
  cmd->add_option("--seed,--seeds", f.seeds, "seed list, e.g. 1 or 1..5 or 1,3");
  cmd->add_option("--steps", f.steps, "environment steps (overrides the agent section)");
  cmd->add_option("--data", f.data, "CSV path or synthetic:SEED");
  cmd->add_option("--out", f.out, "output root (FARM_DISPATCH_OUT overrides the config value)");
  cmd->add_flag("--force", f.force, "allow agent/env pairings outside the reference experiments");
  cmd->add_option("--set", f.overrides, "section.key=value override, repeatable");
}

RunConfig build_config(const RunFlags& f) {
  IniSections ini;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    ini = parse_ini(in, f.config_path);
  }
  if (!f.env.empty()) ini["run"]["env"] = f.env;
  if (!f.agent.empty()) ini["run"]["agent"] = f.agent;
  RunConfig c = RunConfig::from_ini(ini);
  for (const auto& o : f.overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw ConfigError("--set expects section.key=value, got '" + o + "'");
    c.set(o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
  }
  if (!f.seeds.empty()) c.seeds = parse_seed_list(f.seeds);
  if (f.steps > 0) c.steps = f.steps;
  if (!f.data.empty()) c.set("run", "data", f.data);
  if (f.force) c.force = true;
  if (!f.train_months.empty()) {
    c.split.train_months = parse_month_list(f.train_months);
    c.split.test_months.clear();
    for (int m = 1; m <= 12; ++m)
      if (!c.split.train_months.count(m)) c.split.test_months.insert(m);
  }
  c.validate();
  return c;
}

fs::path root_for(const RunConfig& c, const RunFlags& f) {
  return f.out.empty() ? output_root(c) : fs::path(f.out);
}

int train_one(const RunConfig& c, const TimeSeriesYear& year, std::uint64_t seed,
              const fs::path& root) {
  const fs::path dir = root / to_string(c.agent) / std::to_string(seed);
  const auto result = train_run(c, year, seed, dir);
  std::printf("%s seed %llu: cost %.4f import %.4f kWh", to_string(c.agent),
              static_cast<unsigned long long>(seed), total_cost(result.report),
              total_import(result.report));
  if (!result.report.days().empty())
    std::printf(" satisfaction %.4f", satisfaction_rate(result.report.days()));
  std::printf(" -> %s\n", dir.string().c_str());
  std::fflush(stdout);
  return 0;
}

int cmd_train(const RunFlags& f) {
  const RunConfig c = build_config(f);
  const auto year = load_data(c);
  const fs::path root = root_for(c, f);
  if (f.jobs <= 1) {
    for (auto seed : c.seeds) train_one(c, year, seed, root);
    return 0;
  }
  // Independent worker processes, at most `jobs` at a time.
  int failures = 0;
  int running = 0;
  auto reap = [&] {
    int status = 0;
    if (wait(&status) > 0) {
      --running;
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failures;
    }
  };
  for (auto seed : c.seeds) {
    if (running >= f.jobs) reap();
    std::fflush(stdout);
    const pid_t pid = fork();
    if (pid < 0) throw Error("fork failed");
    if (pid == 0) {
      int rc = 1;
      try {
        rc = train_one(c, year, seed, root);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(seed), e.what());
      }
      std::fflush(stdout);
      _exit(rc);
    }
    ++running;
  }
  while (running > 0) reap();
  return failures == 0 ? 0 : 1;
}

struct EvalFlags {
  std::string run_dir;
  std::string checkpoint;
  std::string out;
};

int cmd_evaluate(RunFlags f, const EvalFlags& e) {
  fs::path checkpoint = e.checkpoint;
  if (!e.run_dir.empty()) {
    if (f.config_path.empty()) f.config_path = (fs::path(e.run_dir) / "config.ini").string();
    if (checkpoint.empty()) checkpoint = fs::path(e.run_dir) / "checkpoint.bin";
  }
  if (checkpoint.empty()) throw ConfigError("evaluate needs --run DIR or --checkpoint FILE");
  if (!fs::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint.string());
  const RunConfig c = build_config(f);
  const auto year = load_data(c);
  const std::uint64_t seed = c.seeds.front();
  const auto report = evaluate_run(c, year, seed, checkpoint);
  const fs::path out = !e.out.empty() ? fs::path(e.out) : checkpoint.parent_path() / "eval";
  write_report(report, peak_profile(baseline_report(c, year).hours()), out);
  write_run_metadata(c, report, seed, out);
  std::printf("%zu test months, cost %.4f, import %.4f kWh -> %s\n", report.monthly().size(),
              total_cost(report), total_import(report), out.string().c_str());
  return 0;
}

std::vector<fs::path> find_runs(const std::vector<std::string>& roots) {
  std::vector<fs::path> runs;
  for (const auto& r : roots) {
    const fs::path root(r);
    if (fs::exists(root / "run.json")) {
      runs.push_back(root);
      continue;
    }
    if (!fs::is_directory(root)) throw ConfigError("not a report directory: " + r);
    std::vector<fs::path> found;
    for (const auto& entry : fs::recursive_directory_iterator(root))
      if (entry.path().filename() == "run.json") found.push_back(entry.path().parent_path());
    std::sort(found.begin(), found.end());
    runs.insert(runs.end(), found.begin(), found.end());
  }
  return runs;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out) {
  const auto runs = find_runs(dirs);
  std::vector<StoredReport> reports;
  for (const auto& d : runs) reports.push_back(read_report(d));
  const auto rows = compare_reports(reports);
  write_stats_csv(rows, out);
  for (const auto& r : rows)
    std::printf("%-32s %-10s p=%-12s median=%s n=%zu\n", r.comparison.c_str(), r.metric.c_str(),
                r.p_value ? format_number(*r.p_value).c_str() : "n/a",
                format_number(r.median_improvement).c_str(), r.n);
  return 0;
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) m.std += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(m.std / static_cast<double>(v.size() - 1));
  }
  return m;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out_dir) {
  const auto runs = find_runs(dirs);
  if (runs.empty()) throw ConfigError("no runs found");
  std::vector<StoredReport> reports;
  for (const auto& d : runs) reports.push_back(read_report(d));
  const fs::path out(out_dir);
  fs::create_directories(out);

  std::ofstream monthly(out / "monthly.csv");
  monthly << "run,month,import_kwh,cost,peak_kw,satisfaction\n";
  std::ofstream profile(out / "profile.csv");
  profile << "run,hour,base_kw,scheduled_kw\n";
  std::ofstream summary(out / "summary.csv");
  summary << "agent,seeds,cost_mean,cost_std,import_mean,import_std,peak_reduction_mean,"
             "satisfaction_mean,satisfaction_std\n";

  struct Acc {
    std::vector<double> cost, import, reduction, satisfaction;
  };
  std::map<std::string, Acc> by_agent;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    for (const auto& m : r.report.monthly())
      monthly << r.label << ',' << m.month << ',' << format_number(m.import_kwh) << ','
              << format_number(m.cost) << ',' << format_number(m.peak_kw) << ','
              << (m.satisfaction ? format_number(*m.satisfaction) : std::string()) << '\n';
    PeakProfile base;
    std::ifstream pin(runs[i] / "profile.csv");
    std::string line;
    std::getline(pin, line);
    for (std::size_t h = 0; h < 24 && std::getline(pin, line); ++h) {
      const auto a = line.find(',');
      const auto b = line.find(',', a + 1);
      base.kw[h] = std::stod(line.substr(a + 1, b - a - 1));
    }
    const auto sched = peak_profile(r.report.hours());
    for (std::size_t h = 0; h < 24; ++h)
      profile << r.label << ',' << h << ',' << format_number(base.kw[h]) << ','
              << format_number(sched.kw[h]) << '\n';
    auto& acc = by_agent[r.report.agent()];
    acc.cost.push_back(total_cost(r.report));
    acc.import.push_back(total_import(r.report));
    try {
      acc.reduction.push_back(peak_reduction(base, sched));
    } catch (const DegenerateError&) {
    }
    if (!r.report.days().empty()) acc.satisfaction.push_back(satisfaction_rate(r.report.days()));
  }
  for (const auto& [agent, acc] : by_agent) {
    const auto c = moments(acc.cost);
    const auto im = moments(acc.import);
    const auto red = moments(acc.reduction);
    summary << agent << ',' << acc.cost.size() << ',' << format_number(c.mean) << ','
            << format_number(c.std) << ',' << format_number(im.mean) << ','
            << format_number(im.std) << ',' << format_number(red.mean) << ',';
    if (acc.satisfaction.empty()) {
      summary << ",\n";
    } else {
      const auto s = moments(acc.satisfaction);
      summary << format_number(s.mean) << ',' << format_number(s.std) << '\n';
    }
  }
  if (reports.size() >= 2) write_stats_csv(compare_reports(reports), out / "stats.csv");
  std::printf("%zu runs -> %s\n", reports.size(), out.string().c_str());
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto year = load_csv(path);
  double load = 0.0;
  double pv = 0.0;
  for (const auto& r : year.records()) {
    load += r.load_kw;
    pv += r.pv_kw;
  }
  std::printf("%s: %zu hourly records, load %.1f kWh, pv %.1f kWh\n", path.c_str(), year.size(),
              load, pv);
  return 0;
}

int cmd_calibrate(const RunFlags& f) {
  const RunConfig c = build_config(f);
  const auto year = load_data(c);
  // --out names either a directory or the bands CSV itself; the normalizer
  // and coverage tables are written next to the bands file.
  fs::path bands_path = f.out.empty() ? output_root(c) / "calibration" : fs::path(f.out);
  if (bands_path.extension() != ".csv") bands_path /= "bands.csv";
  const fs::path dir = bands_path.parent_path().empty() ? fs::path(".") : bands_path.parent_path();
  fs::create_directories(dir);
  const std::string stem = bands_path.stem().string();
  const fs::path norm_path = dir / (stem == "bands" ? "normalizer.csv" : stem + "_normalizer.csv");
  const fs::path cov_path = dir / (stem == "bands" ? "coverage.csv" : stem + "_coverage.csv");
  const auto load = year.load();
  const auto pv = year.pv();
  const auto bands_d = fit_bands(load, c.split);
  const auto bands_pv = fit_bands(pv, c.split);
  write_bands_csv(bands_d, bands_pv, bands_path);
  write_normalizer_csv(Normalizer::fit(load, pv, c.split.train_months), norm_path);
  std::ofstream cov(cov_path);
  cov << "channel,month,hour,n,below_q10,above_q90,point_mass\n";
  auto emit = [&cov](const char* name, const std::vector<BucketCoverage>& rows) {
    for (const auto& r : rows)
      cov << name << ',' << r.month << ',' << r.hour << ',' << r.n << ','
          << format_number(r.below_q10) << ',' << format_number(r.above_q90) << ','
          << (r.point_mass ? 1 : 0) << '\n';
  };
  emit("demand", band_coverage(load, bands_d));
  emit("pv", band_coverage(pv, bands_pv));
  std::printf("bands fitted on months %s -> %s\n", format_month_list(c.split.train_months).c_str(),
              bands_path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Battery and water-heater dispatch with reinforcement learning"};
  app.require_subcommand(1);

  std::uint64_t gen_seed = 1;
  std::string gen_out;
  double pv_peak = 20.0;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic year as CSV");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV")->required();
  gen->add_option("--pv-peak", pv_peak, "PV peak power (kW)");

  std::string validate_path;
  auto* val = app.add_subcommand("validate-data", "check a CSV year against the schema");
  val->add_option("file", validate_path)->required();

  RunFlags cal_flags;
  auto* cal = app.add_subcommand("calibrate", "fit forecast bands and report their coverage");
  add_run_flags(cal, cal_flags);
  cal->add_option("--train-months", cal_flags.train_months, "months to fit on, e.g. 1,7");

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "train an agent for every seed");
  add_run_flags(train, train_flags);
  train->add_option("--jobs", train_flags.jobs, "parallel worker processes")->check(CLI::PositiveNumber);

  RunFlags eval_flags;
  EvalFlags eval_extra;
  auto* eval = app.add_subcommand("evaluate", "greedy evaluation of a checkpoint on test months");
  add_run_flags(eval, eval_flags);
  eval->add_option("--run", eval_extra.run_dir, "run directory written by train");
  eval->add_option("--checkpoint", eval_extra.checkpoint, "checkpoint file");
  eval->add_option("--report-dir", eval_extra.out, "where to write the report files");

  std::vector<std::string> compare_dirs;
  std::string compare_out = "stats.csv";
  auto* cmp = app.add_subcommand("compare", "paired Wilcoxon tests between runs");
  cmp->add_option("runs", compare_dirs, "run directories or roots")->required();
  cmp->add_option("--out", compare_out, "stats CSV path");

  std::vector<std::string> report_dirs;
  std::string report_out = "report";
  auto* rep = app.add_subcommand("report", "aggregate runs into monthly/profile/summary/stats CSVs");
  rep->add_option("runs", report_dirs, "run directories or roots")->required();
  rep->add_option("--out", report_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      SyntheticSpec spec;
      spec.seed = gen_seed;
      spec.pv_peak_kw = pv_peak;
      write_csv(generate_synthetic(spec), gen_out);
      std::printf("wrote %s\n", gen_out.c_str());
      return 0;
    }
    if (*val) return cmd_validate(validate_path);
    if (*cal) return cmd_calibrate(cal_flags);
    if (*train) return cmd_train(train_flags);
    if (*eval) return cmd_evaluate(eval_flags, eval_extra);
    if (*cmp) return cmd_compare(compare_dirs, compare_out);
    if (*rep) return cmd_report(report_dirs, report_out);
  } catch (const IngestError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
