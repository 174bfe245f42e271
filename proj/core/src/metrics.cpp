#include "farm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "farm/errors.hpp"

namespace farm {

double PeakProfile::peak() const { return *std::max_element(kw.begin(), kw.end()); }

std::vector<MonthlyAggregate> monthly_aggregates(const std::vector<HourlyRecord>& hours,
                                                 const std::vector<DayLedger>& days) {
  std::map<int, MonthlyAggregate> by_month;
  std::map<std::pair<int, int>, double> daily_max;  // (month, day of year)
  for (const auto& h : hours) {
    auto& m = by_month[h.month];
    m.month = h.month;
    m.import_kwh += h.grid_import_kwh;
    m.cost += h.cost;
    ++m.hours;
    auto [it, fresh] = daily_max.try_emplace({h.month, day_of_year(h.index)}, h.grid_import_kwh);
    if (!fresh) it->second = std::max(it->second, h.grid_import_kwh);
  }
  std::map<int, std::pair<double, int>> peak_sum;
  for (const auto& [key, v] : daily_max) {
    peak_sum[key.first].first += v;
    ++peak_sum[key.first].second;
  }
  std::map<int, std::pair<int, int>> met;
  for (const auto& d : days) {
    const int month = month_of_index(d.day_index * kHoursPerDay);
    ++met[month].second;
    if (d.met) ++met[month].first;
  }
  std::vector<MonthlyAggregate> out;
  for (auto& [month, m] : by_month) {
    const auto& ps = peak_sum[month];
    m.peak_kw = ps.second ? ps.first / ps.second : 0.0;
    if (auto it = met.find(month); it != met.end() && it->second.second > 0)
      m.satisfaction = static_cast<double>(it->second.first) / it->second.second;
    out.push_back(m);
  }
  return out;
}

RunReport::RunReport(std::string env, std::string agent, std::uint64_t seed,
                     std::vector<HourlyRecord> hours, std::vector<DayLedger> days,
                     std::optional<std::vector<MonthlyAggregate>> monthly)
    : env_(std::move(env)),
      agent_(std::move(agent)),
      seed_(seed),
      hours_(std::move(hours)),
      days_(std::move(days)),
      monthly_(monthly_aggregates(hours_, days_)) {
  if (!monthly) return;
  const auto& given = *monthly;
  if (given.size() != monthly_.size())
    throw ValidationError("monthly aggregates do not cover the same months as the hourly data");
  for (std::size_t i = 0; i < given.size(); ++i) {
    const auto& a = given[i];
    const auto& b = monthly_[i];
    const double tol = 1e-6 * std::max(1.0, std::abs(b.import_kwh));
    if (a.month != b.month || std::abs(a.import_kwh - b.import_kwh) > tol ||
        std::abs(a.cost - b.cost) > 1e-6 * std::max(1.0, std::abs(b.cost)))
      throw ValidationError("monthly aggregate for month " + std::to_string(a.month) +
                            " disagrees with its hourly members");
  }
}

double total_cost(const std::vector<HourlyRecord>& hours) {
  double s = 0.0;
  for (const auto& h : hours) s += h.cost;
  return s;
}

double total_cost(const RunReport& r) { return total_cost(r.hours()); }

double total_import(const std::vector<HourlyRecord>& hours) {
  double s = 0.0;
  for (const auto& h : hours) s += h.grid_import_kwh;
  return s;
}

double total_import(const RunReport& r) { return total_import(r.hours()); }

PeakProfile peak_profile(const std::vector<HourlyRecord>& hours) {
  PeakProfile p;
  std::array<std::size_t, 24> n{};
  for (const auto& h : hours) {
    p.kw[static_cast<std::size_t>(h.hour)] += h.grid_import_kwh;
    ++n[static_cast<std::size_t>(h.hour)];
  }
  for (std::size_t k = 0; k < 24; ++k)
    if (n[k]) p.kw[k] /= static_cast<double>(n[k]);
  return p;
}

double peak_reduction(const PeakProfile& base, const PeakProfile& scheduled) {
  const double b = base.peak();
  if (b == 0.0) throw DegenerateError("baseline peak is zero");
  return (b - scheduled.peak()) / b;
}

double satisfaction_rate(const std::vector<DayLedger>& days) {
  if (days.empty()) throw DegenerateError("no days to score");
  const auto met = std::count_if(days.begin(), days.end(), [](const DayLedger& d) { return d.met; });
  return static_cast<double>(met) / static_cast<double>(days.size());
}

double window_adherence(const std::vector<DayLedger>& days) {
  long on = 0;
  long inside = 0;
  for (const auto& d : days) {
    on += d.on_hours_taken;
    inside += d.on_hours_in_window;
  }
  return on ? static_cast<double>(inside) / static_cast<double>(on) : 0.0;
}

namespace {

// Average ranks of |d| (1-based), ties sharing the mean rank.
std::vector<double> abs_ranks(const std::vector<double>& d) {
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> ranks(d.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double v : diffs)
    if (v != 0.0) d.push_back(v);
  if (d.empty()) throw DegenerateError("all paired differences are zero");
  const auto ranks = abs_ranks(d);
  WilcoxonResult r;
  r.n = d.size();
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0.0 ? r.w_plus : r.w_minus) += ranks[i];
  r.statistic = std::min(r.w_plus, r.w_minus);

  if (r.n <= kWilcoxonExactMax) {
    // Ranks are multiples of 1/2, so doubled ranks are integers; count sign
    // assignments by their doubled W+.
    std::vector<int> twice(r.n);
    int total = 0;
    for (std::size_t i = 0; i < r.n; ++i) {
      twice[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
      total += twice[i];
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    int reach = 0;
    for (int w : twice) {
      for (int s = reach; s >= 0; --s)
        if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + w)] += count[static_cast<std::size_t>(s)];
      reach += w;
    }
    const int observed = static_cast<int>(std::lround(2.0 * r.w_plus));
    double lower = 0.0;
    double upper = 0.0;
    for (int s = 0; s <= total; ++s) {
      if (s <= observed) lower += count[static_cast<std::size_t>(s)];
      if (s >= observed) upper += count[static_cast<std::size_t>(s)];
    }
    const double all = std::ldexp(1.0, static_cast<int>(r.n));
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    r.exact = true;
    return r;
  }

  const double n = static_cast<double>(r.n);
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  r.exact = false;
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) throw DegenerateError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace farm
