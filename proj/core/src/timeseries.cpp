#include "farm/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "farm/errors.hpp"

namespace farm {

namespace {

constexpr int kSerializationYear = 2023;
constexpr const char* kHeader = "timestamp,load_kw,pv_kw,price";
constexpr std::size_t kMaxFractionDigits = 6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool parse_int(std::string_view s, int& value) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Plain decimal: optional sign, digits, optional '.' and at most 6 fraction digits.
double parse_decimal(std::string_view s, std::size_t row, const char* column) {
  auto fail = [&](const std::string& why) {
    return ValidationError("row " + std::to_string(row) + " column " + column + ": " + why +
                           " ('" + std::string(s) + "')");
  };
  if (s.empty()) throw fail("empty field");
  std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
  std::size_t int_digits = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++int_digits;
  std::size_t frac_digits = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i, ++frac_digits;
  }
  if (i != s.size() || int_digits + frac_digits == 0) throw fail("not a decimal number");
  if (frac_digits > kMaxFractionDigits) throw fail("more than 6 fractional digits");
  const char* begin = s.data() + (s.front() == '+' ? 1 : 0);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw fail("not a decimal number");
  if (!std::isfinite(value)) throw fail("non-finite value");
  if (value < 0.0) throw fail("negative value");
  return value;
}

struct Timestamp {
  int year = 0;
  int month = 0;
  int day = 0;
  int hour = 0;
};

bool parse_timestamp(std::string_view s, Timestamp& ts) {
  // YYYY-MM-DDTHH:00:00
  if (s.size() != 19 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':')
    return false;
  if (s.substr(14, 2) != "00" || s.substr(17, 2) != "00") return false;
  return parse_int(s.substr(0, 4), ts.year) && parse_int(s.substr(5, 2), ts.month) &&
         parse_int(s.substr(8, 2), ts.day) && parse_int(s.substr(11, 2), ts.hour);
}

std::string format_timestamp(std::size_t index) {
  const int month = month_of_index(index);
  const int day = static_cast<int>((index - month_start_index(month)) / kHoursPerDay) + 1;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00", kSerializationYear, month, day,
                hour_of_index(index));
  return buf;
}

}  // namespace

TimeSeriesYear::TimeSeriesYear(std::vector<TimeStepRecord> records, DataSource source)
    : records_(std::move(records)), source_(std::move(source)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.index != i) throw IngestError(i, "record index out of sequence");
    if (r.hour != hour_of_index(i) || r.month != month_of_index(i))
      throw IngestError(i, "hour/month inconsistent with row order");
    if (!(r.load_kw >= 0.0) || !(r.pv_kw >= 0.0) || !(r.price >= 0.0))
      throw ValidationError("hour " + std::to_string(i) + ": negative or non-finite value");
  }
  if (records_.size() != kHoursPerYear)
    throw IngestError(records_.size(), "expected 8760 hourly records, got " +
                                           std::to_string(records_.size()));
}

std::vector<double> TimeSeriesYear::load() const {
  std::vector<double> out(records_.size());
  std::transform(records_.begin(), records_.end(), out.begin(),
                 [](const TimeStepRecord& r) { return r.load_kw; });
  return out;
}

std::vector<double> TimeSeriesYear::pv() const {
  std::vector<double> out(records_.size());
  std::transform(records_.begin(), records_.end(), out.begin(),
                 [](const TimeStepRecord& r) { return r.pv_kw; });
  return out;
}

std::vector<double> TimeSeriesYear::price() const {
  std::vector<double> out(records_.size());
  std::transform(records_.begin(), records_.end(), out.begin(),
                 [](const TimeStepRecord& r) { return r.price; });
  return out;
}

SplitSpec SplitSpec::heater_default() {
  SplitSpec s;
  s.train_months = {1, 7};
  s.test_months = {2, 3, 4, 5, 6, 8, 9, 10, 11, 12};
  return s;
}

SplitSpec SplitSpec::battery_default() {
  SplitSpec s;
  s.train_months = {1};
  s.test_months = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  return s;
}

void SplitSpec::validate() const {
  for (const auto* months : {&train_months, &test_months})
    for (int m : *months)
      if (m < 1 || m > 12) throw ConfigError("month out of range: " + std::to_string(m));
  for (int m : train_months)
    if (test_months.count(m))
      throw ConfigError("month " + std::to_string(m) + " is in both train and test sets");
}

TimeSeriesYear parse_csv(std::istream& in, DataSource source) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError(0, "empty file");
  if (trim(line) != kHeader)
    throw IngestError(0, "header must be '" + std::string(kHeader) + "'");

  std::vector<TimeStepRecord> records;
  records.reserve(kHoursPerYear);
  int year = -1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::size_t expected = records.size();
    const auto fields = split_fields(line);
    if (fields.size() != 4) throw IngestError(expected, "expected 4 comma-separated fields");
    Timestamp ts;
    if (!parse_timestamp(fields[0], ts))
      throw IngestError(expected, "malformed timestamp '" + std::string(fields[0]) + "'");
    if (ts.month == 2 && ts.day == 29) throw IngestError(expected, "leap-day rows are rejected");
    std::size_t index = 0;
    if (!calendar_index(ts.month, ts.day, ts.hour, index))
      throw IngestError(expected, "impossible date '" + std::string(fields[0]) + "'");
    if (year < 0) year = ts.year;
    if (ts.year != year) throw IngestError(expected, "rows span more than one year");
    if (index > expected) throw IngestError(expected, "missing hour");
    if (index < expected) throw IngestError(index, "duplicate or out-of-order hour");

    TimeStepRecord r;
    r.index = index;
    r.hour = ts.hour;
    r.month = ts.month;
    r.load_kw = parse_decimal(fields[1], expected, "load_kw");
    r.pv_kw = parse_decimal(fields[2], expected, "pv_kw");
    r.price = parse_decimal(fields[3], expected, "price");
    records.push_back(r);
    if (records.size() > kHoursPerYear) throw IngestError(kHoursPerYear, "more than 8760 rows");
  }
  if (records.size() < kHoursPerYear) throw IngestError(records.size(), "missing hour");
  return TimeSeriesYear(std::move(records), std::move(source));
}

TimeSeriesYear load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open " + path.string());
  DataSource source;
  source.kind = DataSource::Kind::csv;
  source.path = path.string();
  return parse_csv(in, std::move(source));
}

void write_csv(const TimeSeriesYear& year, std::ostream& out) {
  out << kHeader << '\n';
  char buf[128];
  for (const auto& r : year.records()) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f\n", format_timestamp(r.index).c_str(),
                  r.load_kw, r.pv_kw, r.price);
    out << buf;
  }
}

void write_csv(const TimeSeriesYear& year, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_csv(year, out);
  if (!out) throw ConfigError("write failed: " + path.string());
}

std::vector<EpisodeRange> slice_episodes(const TimeSeriesYear& year, const SplitSpec& split,
                                         Role role, std::size_t episode_len) {
  const auto& months = split.months(role);
  if (months.empty()) throw ConfigError("no months selected for the requested role");
  if (episode_len == 0) throw ConfigError("episode length must be positive");
  std::vector<EpisodeRange> out;
  for (int m : months) {
    if (m < 1 || m > 12) throw ConfigError("month out of range: " + std::to_string(m));
    const std::size_t start = month_start_index(m);
    const std::size_t stop = std::min(start + month_hours(m), year.size());
    for (std::size_t b = start; b + episode_len <= stop; b += episode_len)
      out.push_back({b, b + episode_len});
  }
  return out;
}

std::vector<std::size_t> month_indices(const std::set<int>& months) {
  std::vector<std::size_t> out;
  for (int m : months) {
    const std::size_t start = month_start_index(m);
    for (std::size_t i = 0; i < month_hours(m); ++i) out.push_back(start + i);
  }
  return out;
}

std::set<int> parse_month_list(const std::string& text) {
  std::set<int> months;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = trim(item);
    if (t.empty()) continue;
    const auto dash = t.find('-');
    int lo = 0;
    int hi = 0;
    if (dash == std::string_view::npos) {
      if (!parse_int(t, lo)) throw ConfigError("bad month '" + std::string(t) + "'");
      hi = lo;
    } else if (!parse_int(trim(t.substr(0, dash)), lo) ||
               !parse_int(trim(t.substr(dash + 1)), hi)) {
      throw ConfigError("bad month range '" + std::string(t) + "'");
    }
    if (lo < 1 || hi > 12 || lo > hi) throw ConfigError("bad month range '" + std::string(t) + "'");
    for (int m = lo; m <= hi; ++m) months.insert(m);
  }
  return months;
}

std::string format_month_list(const std::set<int>& months) {
  std::string out;
  for (int m : months) {
    if (!out.empty()) out += ',';
    out += std::to_string(m);
  }
  return out;
}

}  // namespace farm
