#include "farm/calendar.hpp"

#include <cstdlib>

namespace farm {

namespace {

constexpr std::array<std::size_t, 13> month_offsets() {
  std::array<std::size_t, 13> offsets{};
  for (std::size_t m = 0; m < 12; ++m)
    offsets[m + 1] = offsets[m] + static_cast<std::size_t>(kDaysInMonth[m]) * kHoursPerDay;
  return offsets;
}

constexpr auto kMonthOffsets = month_offsets();

}  // namespace

int month_of_index(std::size_t index) {
  const std::size_t wrapped = index % kHoursPerYear;
  for (int m = 0; m < 12; ++m)
    if (wrapped < kMonthOffsets[static_cast<std::size_t>(m) + 1]) return m + 1;
  return 12;
}

int hour_of_index(std::size_t index) { return static_cast<int>(index % kHoursPerDay); }

int day_of_year(std::size_t index) {
  return static_cast<int>((index % kHoursPerYear) / kHoursPerDay);
}

std::size_t month_start_index(int month) {
  return kMonthOffsets[static_cast<std::size_t>(month - 1)];
}

std::size_t month_hours(int month) {
  return static_cast<std::size_t>(kDaysInMonth[static_cast<std::size_t>(month - 1)]) *
         kHoursPerDay;
}

bool calendar_index(int month, int day, int hour, std::size_t& index) {
  if (month < 1 || month > 12 || hour < 0 || hour > 23 || day < 1) return false;
  if (day > kDaysInMonth[static_cast<std::size_t>(month - 1)]) return false;
  index = month_start_index(month) + static_cast<std::size_t>(day - 1) * kHoursPerDay +
          static_cast<std::size_t>(hour);
  return true;
}

int circular_month_distance(int a, int b) {
  const int d = std::abs(a - b) % 12;
  return d > 6 ? 12 - d : d;
}

}  // namespace farm
