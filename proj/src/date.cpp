#include "lightfire/date.h"
#include <cstdio>
#include <stdexcept>

namespace lightfire
{
namespace
{
bool parse_digits(std::string_view s, int& out)
{
  out = 0;
  for (const char c : s)
  {
    if (c < '0' || c > '9')
    {
      return false;
    }
    out = out * 10 + (c - '0');
  }
  return !s.empty();
}
}
Date parse_date(const std::string_view text)
{
  int y = 0;
  int m = 0;
  int d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_digits(text.substr(0, 4), y)
      || !parse_digits(text.substr(5, 2), m) || !parse_digits(text.substr(8, 2), d))
  {
    throw std::invalid_argument("unparsable date '" + std::string(text) + "'");
  }
  const std::chrono::year_month_day ymd{
    std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)}, std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok())
  {
    throw std::invalid_argument("unparsable date '" + std::string(text) + "'");
  }
  return Date{ymd};
}
std::string format_date(const Date d)
{
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf,
                sizeof(buf),
                "%04d-%02u-%02u",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}
int year_of(const Date d)
{
  return static_cast<int>(std::chrono::year_month_day{d}.year());
}
int month_of(const Date d)
{
  return static_cast<int>(static_cast<unsigned>(std::chrono::year_month_day{d}.month()));
}
int day_of_year(const Date d)
{
  const auto y = std::chrono::year_month_day{d}.year();
  return static_cast<int>((d - Date{y / std::chrono::January / 1}).count()) + 1;
}
}
