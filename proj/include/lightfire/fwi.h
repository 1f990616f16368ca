#pragma once
#include <cstdint>
#include <span>
#include <vector>

namespace lightfire::fwi
{
enum class LatitudeBand
{
  north,
  south,
  equatorial
};
/// Northern band at or above 10N, southern at or below 10S.
LatitudeBand band_for_latitude(double lat);

/// Noon weather for one day.
struct DailyWeather
{
  double temp_c{20.0};
  double rh_pct{50.0};
  double wind_kmh{0.0};
  double rain_mm{0.0};
  int month{7};
  LatitudeBand band{LatitudeBand::north};
};

/// Moisture codes carried from day to day. Defaults are the conventional start-up values.
struct FwiState
{
  double ffmc{85.0};
  double dmc{6.0};
  double dc{15.0};
};

struct FwiOutputs
{
  double isi{0.0};
  double bui{0.0};
  double fwi{0.0};
};

/// Bit flags describing inputs that were clamped into physical range.
enum ClampFlag : std::uint32_t
{
  CLAMP_NONE = 0,
  CLAMP_RH = 1u << 0,
  CLAMP_WIND = 1u << 1,
  CLAMP_RAIN = 1u << 2,
  CLAMP_MONTH = 1u << 3,
  CLAMP_STATE = 1u << 4,
};

struct StepResult
{
  FwiState state;
  FwiOutputs outputs;
  std::uint32_t clamped{CLAMP_NONE};
};

/// Day-length factor used by the duff moisture code.
double dmc_day_length(int month, LatitudeBand band);
/// Day-length adjustment used by the drought code.
double dc_day_length(int month, LatitudeBand band);

double ffmc_next(double ffmc_prev, const DailyWeather& wx);
double dmc_next(double dmc_prev, const DailyWeather& wx);
double dc_next(double dc_prev, const DailyWeather& wx);
/// FFMC moisture factor f(F) of the initial spread index.
double ffmc_spread_factor(double ffmc);
double initial_spread_index(double ffmc, double wind_kmh);
double buildup_index(double dmc, double dc);
double fire_weather_index(double isi, double bui);

/// Advance one day. Out-of-range inputs are clamped and reported in `clamped`.
StepResult step(const FwiState& state, const DailyWeather& wx);

struct DayIndices
{
  FwiState codes;
  FwiOutputs derived;
};
/// Thread state through `days` in order. Throws std::invalid_argument("empty series").
std::vector<DayIndices> roll_series(const FwiState& init, std::span<const DailyWeather> days);
}
