#pragma once
#include "lightfire/csv.h"
#include "lightfire/date.h"
#include "lightfire/geo.h"
#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lightfire::ingest
{
struct WildfireEvent
{
  std::string fire_id;
  geo::GeoPoint ignition;
  Date ignition_date;
  int duration_days{1};
  double total_burned_ha{0.0};
  double first_day_burned_ha{0.0};
};

/// One 0.05 degree cell-day with at least one thunderhour.
struct ThunderRecord
{
  geo::CellId cell;
  Date date;
  int thunder_hours{1};
};

/// Daily means on the 0.25 degree grid. Empty CSV fields load as nullopt.
struct WeatherDay
{
  geo::CellId cell;
  Date date;
  std::optional<double> t_c;
  std::optional<double> rh_pct;
  std::optional<double> prec_mm;
  std::optional<double> wind_u_ms;
  std::optional<double> wind_v_ms;
  std::optional<double> sm;
  std::optional<double> water_mm;
};

struct StaticCell
{
  geo::CellId cell;
  std::optional<double> low_veg;
  std::optional<double> high_veg;
  std::optional<double> pop;
  std::optional<double> historical_fires;
  std::array<std::optional<double>, 12> ndvi_by_month{};
};

/// Precomputed fire weather indices for a 0.25 degree cell-day.
struct FwiRecord
{
  geo::CellId cell;
  Date date;
  std::optional<double> ffmc;
  std::optional<double> dmc;
  std::optional<double> dc;
  std::optional<double> isi;
  std::optional<double> bui;
  std::optional<double> fwi;
};

std::vector<WildfireEvent> parse_fires(const csv::Table& table);
std::vector<ThunderRecord> parse_thunder(const csv::Table& table);
std::vector<WeatherDay> parse_weather(const csv::Table& table);
std::vector<StaticCell> parse_static(const csv::Table& table);
std::vector<FwiRecord> parse_fwi(const csv::Table& table);

std::vector<WildfireEvent> read_fires(const std::filesystem::path& path);
std::vector<ThunderRecord> read_thunder(const std::filesystem::path& path);
std::vector<WeatherDay> read_weather(const std::filesystem::path& path);
std::vector<StaticCell> read_static(const std::filesystem::path& path);
std::vector<FwiRecord> read_fwi(const std::filesystem::path& path);

std::string write_fires(std::span<const WildfireEvent> fires);
std::string write_thunder(std::span<const ThunderRecord> thunder);
std::string write_weather(std::span<const WeatherDay> weather);
std::string write_static(std::span<const StaticCell> cells);
std::string write_fwi(std::span<const FwiRecord> records);

/// Per-cell daily series keyed by cell, each sorted by date.
template <class Record>
class CellSeries
{
public:
  CellSeries() = default;
  explicit CellSeries(std::vector<Record> records)
  {
    for (auto& r : records)
    {
      series_[r.cell].push_back(std::move(r));
    }
    for (auto& [cell, v] : series_)
    {
      std::sort(v.begin(), v.end(), [](const Record& a, const Record& b) { return a.date < b.date; });
    }
  }
  [[nodiscard]] const std::vector<Record>* series(const geo::CellId& c) const
  {
    const auto it = series_.find(c);
    return it == series_.end() ? nullptr : &it->second;
  }
  /// Position of `d` within the cell's series, or nullopt.
  [[nodiscard]] std::optional<std::size_t> position(const geo::CellId& c, const Date d) const
  {
    const auto* s = series(c);
    if (s == nullptr)
    {
      return std::nullopt;
    }
    const auto it = std::lower_bound(
      s->begin(), s->end(), d, [](const Record& r, const Date x) { return r.date < x; });
    if (it == s->end() || it->date != d)
    {
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - s->begin());
  }
  [[nodiscard]] const std::map<geo::CellId, std::vector<Record>>& cells() const { return series_; }
  [[nodiscard]] bool empty() const { return series_.empty(); }
private:
  std::map<geo::CellId, std::vector<Record>> series_;
};

using WeatherTable = CellSeries<WeatherDay>;
using FwiTable = CellSeries<FwiRecord>;
using StaticTable = std::map<geo::CellId, StaticCell>;
StaticTable index_static(std::vector<StaticCell> cells);

/// Outcome of removing rows with any missing model feature.
struct DropReport
{
  std::size_t rows_in{0};
  std::size_t removed{0};
  std::size_t removed_positive{0};
  std::size_t removed_negative{0};
  double fraction{0.0};
  std::vector<std::string> warnings;
};

template <class Row>
concept IncompleteRow = requires(const Row& r) {
  { r.values } -> std::convertible_to<std::vector<std::optional<double>>>;
  { r.label } -> std::convertible_to<bool>;
};

/// Remove every row with an empty model feature. Both classes are filtered and counted.
template <IncompleteRow Row>
DropReport drop_incomplete(std::vector<Row>& rows)
{
  DropReport report;
  report.rows_in = rows.size();
  std::vector<Row> kept;
  kept.reserve(rows.size());
  for (auto& r : rows)
  {
    const bool complete = std::all_of(r.values.begin(), r.values.end(), [](const auto& v) { return v.has_value(); });
    if (complete)
    {
      kept.push_back(std::move(r));
      continue;
    }
    ++report.removed;
    if (r.label)
    {
      ++report.removed_positive;
    }
    else
    {
      ++report.removed_negative;
    }
  }
  rows = std::move(kept);
  report.fraction = report.rows_in == 0 ? 0.0 : static_cast<double>(report.removed) / static_cast<double>(report.rows_in);
  if (report.rows_in > 0 && rows.empty())
  {
    report.warnings.emplace_back("every row had a missing feature; dataset is empty");
  }
  return report;
}

enum class IgnitionCause
{
  lightning,
  anthropogenic
};

/// Shape of the planted lightning ignition law over standardized
/// (ffmc, rh, prec, ndvi). `interaction` replaces the linear ffmc and rh terms by
/// w_ffmc * z_ffmc * z_rh, which no linear model can represent.
struct IgnitionLaw
{
  enum class Shape
  {
    logistic,
    interaction
  };
  Shape shape{Shape::logistic};
  double intercept{-1.0};
  double w_ffmc{4.0};
  double w_rh{-4.0};
  double w_prec{0.0};
  double w_ndvi{0.0};
  [[nodiscard]] double logit(double z_ffmc, double z_rh, double z_prec, double z_ndvi) const;
};

struct SynthConfig
{
  std::uint64_t seed{42};
  int n_cells{64};
  Date start{make_date(2013, 9, 3)};
  int spinup_days{120};
  int n_days{3042};
  double lat_min{38.0};
  double lat_max{50.0};
  double lon_min{-124.0};
  double lon_max{-104.0};
  /// Base probability of a storm on a warm weather-cell-day.
  double storm_rate{0.08};
  /// Scales the planted ignition probability of each thunder cell-day.
  double fire_base_rate{0.9};
  /// Base probability of a human-caused ignition per weather-cell-day.
  double anthropogenic_rate{0.03};
  /// Fraction of fires lasting a single day.
  double single_day_fraction{0.15};
  /// Probability that a weather row's skin reservoir field is left empty.
  double missing_rate{0.005};
  /// Largest delay between a storm and the ignition it causes, in days.
  int holdover_lag_max{0};
  /// Labeling geometry the generator keeps anthropogenic fires clear of.
  double guard_radius_km{10.0};
  int guard_holdover_days{7};
  IgnitionLaw planted;
  /// Anthropogenic law over standardized (pop, t, sm).
  double anthro_intercept{-2.0};
  double anthro_w_pop{6.0};
  double anthro_w_t{0.5};
  double anthro_w_sm{-1.0};
  bool write_fwi{true};

  void validate() const;
};

struct FireTruth
{
  std::string fire_id;
  IgnitionCause cause{IgnitionCause::anthropogenic};
  /// Storm cell-day that caused a lightning fire.
  std::optional<ThunderRecord> storm;
};

/// Ignition bookkeeping per thunder cell-day, for generator-side frequency checks.
struct StormDraw
{
  ThunderRecord thunder;
  double ffmc{0.0};
  double probability{0.0};
  bool ignited{false};
};

struct World
{
  std::vector<WildfireEvent> fires;
  std::vector<ThunderRecord> thunder;
  std::vector<WeatherDay> weather;
  std::vector<StaticCell> statics;
  std::vector<FwiRecord> fwi;
  std::vector<FireTruth> truth;
  std::vector<StormDraw> storms;
};

/// Deterministic planted-law world. Single threaded so identical seeds produce identical bytes.
World synth_world(const SynthConfig& cfg);
std::string write_truth(std::span<const FireTruth> truth);
/// Write fires/thunder/weather/static(/fwi)/truth CSVs into `dir`; returns written paths.
std::vector<std::filesystem::path> write_world(const World& world, const std::filesystem::path& dir, bool with_fwi);
}
