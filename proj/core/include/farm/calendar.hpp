#pragma once

#include <array>
#include <cstddef>

namespace farm {

inline constexpr std::size_t kHoursPerDay = 24;
inline constexpr std::size_t kDaysPerYear = 365;
inline constexpr std::size_t kHoursPerYear = kHoursPerDay * kDaysPerYear;

inline constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30,
                                                     31, 31, 30, 31, 30, 31};

/// Month (1..12) of an hour-of-year index on the fixed non-leap calendar.
int month_of_index(std::size_t index);
int hour_of_index(std::size_t index);
int day_of_year(std::size_t index);

/// First hour-of-year index of `month` (1..12).
std::size_t month_start_index(int month);
std::size_t month_hours(int month);

/// Hour-of-year index for a calendar position; day is 1-based.
/// Returns false for impossible dates (including 29 February).
bool calendar_index(int month, int day, int hour, std::size_t& index);

/// Shortest distance between two months on the 12-month circle.
int circular_month_distance(int a, int b);

}  // namespace farm
