#pragma once
#include <chrono>
#include <string>
#include <string_view>

namespace lightfire
{
/// Calendar day. Arithmetic is in whole days.
using Date = std::chrono::sys_days;

/// Parse strict ISO-8601 `YYYY-MM-DD`. Throws std::invalid_argument on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date d);

int year_of(Date d);
/// 1..12
int month_of(Date d);
int day_of_year(Date d);

inline Date make_date(const int y, const unsigned m, const unsigned d)
{
  return Date{std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}};
}
inline long days_between(const Date from, const Date to)
{
  return static_cast<long>((to - from).count());
}
}
