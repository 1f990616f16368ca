#include "lightfire/fwi.h"
#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

// Canadian Forest Fire Weather Index System, daily (noon) formulation of
// Van Wagner, C.E. 1987. Development and structure of the Canadian Forest Fire
// Weather Index System. Canadian Forestry Service, Forestry Technical Report 35.
namespace lightfire::fwi
{
namespace
{
constexpr std::array<double, 12> DMC_DAY_LENGTH_N{6.5, 7.5, 9.0, 12.8, 13.9, 13.9, 12.4, 10.9, 9.4, 8.0, 7.0, 6.0};
constexpr std::array<double, 12> DC_DAY_LENGTH_N{-1.6, -1.6, -1.6, 0.9, 3.8, 5.8, 6.4, 5.0, 2.4, 0.4, -1.6, -1.6};
constexpr double DMC_DAY_LENGTH_EQ = 9.0;
constexpr double DC_DAY_LENGTH_EQ = 1.4;
std::size_t table_index(const int month, const LatitudeBand band)
{
  const auto m = static_cast<std::size_t>(std::clamp(month, 1, 12) - 1);
  // southern hemisphere seasons are the northern table shifted by six months
  return band == LatitudeBand::south ? (m + 6) % 12 : m;
}
double ffmc_to_moisture(const double ffmc)
{
  return 147.2 * (101.0 - ffmc) / (59.5 + ffmc);
}
}
LatitudeBand band_for_latitude(const double lat)
{
  if (lat >= 10.0)
  {
    return LatitudeBand::north;
  }
  if (lat <= -10.0)
  {
    return LatitudeBand::south;
  }
  return LatitudeBand::equatorial;
}
double dmc_day_length(const int month, const LatitudeBand band)
{
  return band == LatitudeBand::equatorial ? DMC_DAY_LENGTH_EQ : DMC_DAY_LENGTH_N[table_index(month, band)];
}
double dc_day_length(const int month, const LatitudeBand band)
{
  return band == LatitudeBand::equatorial ? DC_DAY_LENGTH_EQ : DC_DAY_LENGTH_N[table_index(month, band)];
}
double ffmc_next(const double ffmc_prev, const DailyWeather& wx)
{
  const double t = wx.temp_c;
  const double h = wx.rh_pct;
  const double w = wx.wind_kmh;
  double mo = ffmc_to_moisture(ffmc_prev);
  if (wx.rain_mm > 0.5)
  {
    const double rf = wx.rain_mm - 0.5;
    double mr = mo + 42.5 * rf * std::exp(-100.0 / (251.0 - mo)) * (1.0 - std::exp(-6.93 / rf));
    if (mo > 150.0)
    {
      mr += 0.0015 * (mo - 150.0) * (mo - 150.0) * std::sqrt(rf);
    }
    mo = std::min(mr, 250.0);
  }
  const double ed = 0.942 * std::pow(h, 0.679) + 11.0 * std::exp((h - 100.0) / 10.0)
                  + 0.18 * (21.1 - t) * (1.0 - std::exp(-0.115 * h));
  double m = mo;
  if (mo > ed)
  {
    const double ko = 0.424 * (1.0 - std::pow(h / 100.0, 1.7)) + 0.0694 * std::sqrt(w) * (1.0 - std::pow(h / 100.0, 8.0));
    const double kd = ko * 0.581 * std::exp(0.0365 * t);
    m = ed + (mo - ed) * std::pow(10.0, -kd);
  }
  else
  {
    const double ew = 0.618 * std::pow(h, 0.753) + 10.0 * std::exp((h - 100.0) / 10.0)
                    + 0.18 * (21.1 - t) * (1.0 - std::exp(-0.115 * h));
    if (mo < ew)
    {
      const double dry = (100.0 - h) / 100.0;
      const double kl = 0.424 * (1.0 - std::pow(dry, 1.7)) + 0.0694 * std::sqrt(w) * (1.0 - std::pow(dry, 8.0));
      const double kw = kl * 0.581 * std::exp(0.0365 * t);
      m = ew - (ew - mo) * std::pow(10.0, -kw);
    }
  }
  return std::clamp(59.5 * (250.0 - m) / (147.2 + m), 0.0, 101.0);
}
double dmc_next(const double dmc_prev, const DailyWeather& wx)
{
  double p = dmc_prev;
  if (wx.rain_mm > 1.5)
  {
    const double re = 0.92 * wx.rain_mm - 1.27;
    const double mo = 20.0 + std::exp(5.6348 - p / 43.43);
    double b = 0.0;
    if (p <= 33.0)
    {
      b = 100.0 / (0.5 + 0.3 * p);
    }
    else if (p <= 65.0)
    {
      b = 14.0 - 1.3 * std::log(p);
    }
    else
    {
      b = 6.2 * std::log(p) - 17.2;
    }
    const double mr = mo + 1000.0 * re / (48.77 + b * re);
    p = std::max(244.72 - 43.43 * std::log(mr - 20.0), 0.0);
  }
  const double t = std::max(wx.temp_c, -1.1);
  const double k = 1.894 * (t + 1.1) * (100.0 - wx.rh_pct) * dmc_day_length(wx.month, wx.band) * 1e-4;
  return p + k;
}
double dc_next(const double dc_prev, const DailyWeather& wx)
{
  double d = dc_prev;
  if (wx.rain_mm > 2.8)
  {
    const double rd = 0.83 * wx.rain_mm - 1.27;
    const double qo = 800.0 * std::exp(-d / 400.0);
    const double qr = qo + 3.937 * rd;
    d = std::max(400.0 * std::log(800.0 / qr), 0.0);
  }
  const double t = std::max(wx.temp_c, -2.8);
  const double v = std::max(0.36 * (t + 2.8) + dc_day_length(wx.month, wx.band), 0.0);
  return d + 0.5 * v;
}
double ffmc_spread_factor(const double ffmc)
{
  const double m = ffmc_to_moisture(ffmc);
  return 91.9 * std::exp(-0.1386 * m) * (1.0 + std::pow(m, 5.31) / 4.93e7);
}
double initial_spread_index(const double ffmc, const double wind_kmh)
{
  return 0.208 * std::exp(0.05039 * wind_kmh) * ffmc_spread_factor(ffmc);
}
double buildup_index(const double dmc, const double dc)
{
  if (dmc <= 0.0 && dc <= 0.0)
  {
    return 0.0;
  }
  double u = 0.0;
  if (dmc <= 0.4 * dc)
  {
    u = 0.8 * dmc * dc / (dmc + 0.4 * dc);
  }
  else
  {
    u = dmc - (1.0 - 0.8 * dc / (dmc + 0.4 * dc)) * (0.92 + std::pow(0.0114 * dmc, 1.7));
  }
  return std::max(u, 0.0);
}
double fire_weather_index(const double isi, const double bui)
{
  const double fd = bui <= 80.0 ? 0.626 * std::pow(bui, 0.809) + 2.0 : 1000.0 / (25.0 + 108.64 * std::exp(-0.023 * bui));
  const double b = 0.1 * isi * fd;
  return b > 1.0 ? std::exp(2.72 * std::pow(0.434 * std::log(b), 0.647)) : b;
}
StepResult step(const FwiState& state, const DailyWeather& wx_in)
{
  if (!std::isfinite(wx_in.temp_c) || !std::isfinite(wx_in.rh_pct) || !std::isfinite(wx_in.wind_kmh)
      || !std::isfinite(wx_in.rain_mm) || !std::isfinite(state.ffmc) || !std::isfinite(state.dmc)
      || !std::isfinite(state.dc))
  {
    throw std::invalid_argument("non-finite fire weather input");
  }
  StepResult out;
  DailyWeather wx = wx_in;
  const auto clamp_into = [&out](double& x, const double lo, const double hi, const ClampFlag flag) {
    const double c = std::clamp(x, lo, hi);
    if (c != x)
    {
      out.clamped |= flag;
      x = c;
    }
  };
  clamp_into(wx.rh_pct, 0.0, 100.0, CLAMP_RH);
  clamp_into(wx.wind_kmh, 0.0, INFINITY, CLAMP_WIND);
  clamp_into(wx.rain_mm, 0.0, INFINITY, CLAMP_RAIN);
  if (wx.month < 1 || wx.month > 12)
  {
    out.clamped |= CLAMP_MONTH;
    wx.month = std::clamp(wx.month, 1, 12);
  }
  FwiState prev = state;
  clamp_into(prev.ffmc, 0.0, 101.0, CLAMP_STATE);
  clamp_into(prev.dmc, 0.0, INFINITY, CLAMP_STATE);
  clamp_into(prev.dc, 0.0, INFINITY, CLAMP_STATE);

  out.state.ffmc = ffmc_next(prev.ffmc, wx);
  out.state.dmc = dmc_next(prev.dmc, wx);
  out.state.dc = dc_next(prev.dc, wx);
  out.outputs.isi = initial_spread_index(out.state.ffmc, wx.wind_kmh);
  out.outputs.bui = buildup_index(out.state.dmc, out.state.dc);
  out.outputs.fwi = fire_weather_index(out.outputs.isi, out.outputs.bui);
  return out;
}
std::vector<DayIndices> roll_series(const FwiState& init, const std::span<const DailyWeather> days)
{
  if (days.empty())
  {
    throw std::invalid_argument("empty series");
  }
  std::vector<DayIndices> out;
  out.reserve(days.size());
  FwiState s = init;
  for (const auto& wx : days)
  {
    const auto r = step(s, wx);
    s = r.state;
    out.push_back(DayIndices{r.state, r.outputs});
  }
  return out;
}
}
