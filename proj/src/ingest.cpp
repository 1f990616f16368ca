#include "lightfire/ingest.h"
#include "lightfire/fwi.h"
#include "lightfire/util.h"
#include <cmath>
#include <set>
#include <stdexcept>

namespace lightfire::ingest
{
namespace
{
std::string at_row(const std::size_t row)
{
  return " at row " + std::to_string(row);
}
Date date_field(const csv::Table& t, const std::size_t r, const std::size_t c)
{
  try
  {
    return parse_date(t.at(r, c));
  }
  catch (const std::invalid_argument&)
  {
    throw std::runtime_error(t.source() + ": unparsable date" + at_row(r + 1));
  }
}
geo::CellId cell_field(const csv::Table& t,
                       const std::size_t r,
                       const std::size_t row_col,
                       const std::size_t col_col,
                       const geo::GridSpec& grid)
{
  const auto row = csv::parse_int(t.at(r, row_col), "row", r + 1);
  const auto col = csv::parse_int(t.at(r, col_col), "col", r + 1);
  if (row < 0 || row >= grid.rows() || col < 0 || col >= grid.cols())
  {
    throw std::runtime_error(t.source() + ": cell index out of range" + at_row(r + 1));
  }
  return geo::CellId{static_cast<std::int32_t>(row), static_cast<std::int32_t>(col)};
}
void check_range(const csv::Table& t,
                 const std::optional<double>& v,
                 const double lo,
                 const double hi,
                 const std::string& name,
                 const std::size_t r)
{
  if (v && (*v < lo || *v > hi))
  {
    throw std::runtime_error(t.source() + ": " + name + " out of range" + at_row(r + 1));
  }
}
template <class Record>
void check_unique_keys(const csv::Table& t, const std::vector<Record>& records)
{
  std::set<std::pair<Date, geo::CellId>> seen;
  for (std::size_t i = 0; i < records.size(); ++i)
  {
    if (!seen.emplace(records[i].date, records[i].cell).second)
    {
      throw std::runtime_error(t.source() + ": duplicate key (date,row,col)" + at_row(i + 1));
    }
  }
}
constexpr const char* NDVI_COLUMNS[12] = {"ndvi_m01",
                                          "ndvi_m02",
                                          "ndvi_m03",
                                          "ndvi_m04",
                                          "ndvi_m05",
                                          "ndvi_m06",
                                          "ndvi_m07",
                                          "ndvi_m08",
                                          "ndvi_m09",
                                          "ndvi_m10",
                                          "ndvi_m11",
                                          "ndvi_m12"};
}
std::vector<WildfireEvent> parse_fires(const csv::Table& t)
{
  const auto c_id = t.column("fire_id");
  const auto c_lat = t.column("lat");
  const auto c_lon = t.column("lon");
  const auto c_date = t.column("ignition_date");
  const auto c_dur = t.column("duration_days");
  const auto c_total = t.column("total_burned_ha");
  const auto c_first = t.column("first_day_burned_ha");
  std::vector<WildfireEvent> out;
  out.reserve(t.rows());
  std::set<std::string> ids;
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    const auto k = r + 1;
    WildfireEvent e;
    e.fire_id = t.at(r, c_id);
    if (e.fire_id.empty())
    {
      throw std::runtime_error(t.source() + ": empty fire_id" + at_row(k));
    }
    if (!ids.insert(e.fire_id).second)
    {
      throw std::runtime_error(t.source() + ": duplicate key fire_id" + at_row(k));
    }
    const double lat = csv::parse_double(t.at(r, c_lat), "lat", k);
    const double lon = csv::parse_double(t.at(r, c_lon), "lon", k);
    if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0)
    {
      throw std::runtime_error(t.source() + ": coordinate out of range" + at_row(k));
    }
    e.ignition = geo::make_point(lat, lon);
    e.ignition_date = date_field(t, r, c_date);
    const auto dur = csv::parse_int(t.at(r, c_dur), "duration_days", k);
    if (dur < 1)
    {
      throw std::runtime_error(t.source() + ": duration_days must be >= 1" + at_row(k));
    }
    e.duration_days = static_cast<int>(dur);
    e.total_burned_ha = csv::parse_double(t.at(r, c_total), "total_burned_ha", k);
    e.first_day_burned_ha = csv::parse_double(t.at(r, c_first), "first_day_burned_ha", k);
    if (e.total_burned_ha < 0.0 || e.first_day_burned_ha < 0.0)
    {
      throw std::runtime_error(t.source() + ": negative area" + at_row(k));
    }
    if (e.first_day_burned_ha > e.total_burned_ha)
    {
      throw std::runtime_error(t.source() + ": first_day_burned_ha exceeds total_burned_ha" + at_row(k));
    }
    out.push_back(std::move(e));
  }
  return out;
}
std::vector<ThunderRecord> parse_thunder(const csv::Table& t)
{
  const auto c_date = t.column("date");
  const auto c_row = t.column("row");
  const auto c_col = t.column("col");
  const auto c_hours = t.column("thunder_hours");
  std::vector<ThunderRecord> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    ThunderRecord rec;
    rec.date = date_field(t, r, c_date);
    rec.cell = cell_field(t, r, c_row, c_col, geo::THUNDER_GRID);
    const auto h = csv::parse_int(t.at(r, c_hours), "thunder_hours", r + 1);
    if (h < 1 || h > 24)
    {
      throw std::runtime_error(t.source() + ": thunder_hours out of range" + at_row(r + 1));
    }
    rec.thunder_hours = static_cast<int>(h);
    out.push_back(rec);
  }
  check_unique_keys(t, out);
  return out;
}
std::vector<WeatherDay> parse_weather(const csv::Table& t)
{
  const auto c_date = t.column("date");
  const auto c_row = t.column("row");
  const auto c_col = t.column("col");
  const auto c_t = t.column("t_c");
  const auto c_rh = t.column("rh_pct");
  const auto c_prec = t.column("prec_mm");
  const auto c_u = t.column("wind_u_ms");
  const auto c_v = t.column("wind_v_ms");
  const auto c_sm = t.column("sm");
  const auto c_water = t.column("water_mm");
  std::vector<WeatherDay> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    const auto k = r + 1;
    WeatherDay w;
    w.date = date_field(t, r, c_date);
    w.cell = cell_field(t, r, c_row, c_col, geo::WEATHER_GRID);
    w.t_c = csv::parse_optional(t.at(r, c_t), "t_c", k);
    w.rh_pct = csv::parse_optional(t.at(r, c_rh), "rh_pct", k);
    w.prec_mm = csv::parse_optional(t.at(r, c_prec), "prec_mm", k);
    w.wind_u_ms = csv::parse_optional(t.at(r, c_u), "wind_u_ms", k);
    w.wind_v_ms = csv::parse_optional(t.at(r, c_v), "wind_v_ms", k);
    w.sm = csv::parse_optional(t.at(r, c_sm), "sm", k);
    w.water_mm = csv::parse_optional(t.at(r, c_water), "water_mm", k);
    check_range(t, w.rh_pct, 0.0, 100.0, "rh_pct", r);
    check_range(t, w.prec_mm, 0.0, INFINITY, "prec_mm", r);
    check_range(t, w.sm, 0.0, 1.0, "sm", r);
    check_range(t, w.water_mm, 0.0, INFINITY, "water_mm", r);
    out.push_back(w);
  }
  check_unique_keys(t, out);
  return out;
}
std::vector<StaticCell> parse_static(const csv::Table& t)
{
  const auto c_row = t.column("row");
  const auto c_col = t.column("col");
  const auto c_low = t.column("low_veg");
  const auto c_high = t.column("high_veg");
  const auto c_pop = t.column("pop");
  const auto c_hist = t.column("historical_fires");
  std::array<std::size_t, 12> c_ndvi{};
  for (std::size_t m = 0; m < 12; ++m)
  {
    c_ndvi[m] = t.column(NDVI_COLUMNS[m]);
  }
  std::vector<StaticCell> out;
  out.reserve(t.rows());
  std::set<geo::CellId> seen;
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    const auto k = r + 1;
    StaticCell s;
    s.cell = cell_field(t, r, c_row, c_col, geo::WEATHER_GRID);
    if (!seen.insert(s.cell).second)
    {
      throw std::runtime_error(t.source() + ": duplicate key (row,col)" + at_row(k));
    }
    s.low_veg = csv::parse_optional(t.at(r, c_low), "low_veg", k);
    s.high_veg = csv::parse_optional(t.at(r, c_high), "high_veg", k);
    s.pop = csv::parse_optional(t.at(r, c_pop), "pop", k);
    s.historical_fires = csv::parse_optional(t.at(r, c_hist), "historical_fires", k);
    check_range(t, s.low_veg, 0.0, 1.0, "low_veg", r);
    check_range(t, s.high_veg, 0.0, 1.0, "high_veg", r);
    check_range(t, s.pop, 0.0, INFINITY, "pop", r);
    check_range(t, s.historical_fires, 0.0, INFINITY, "historical_fires", r);
    for (std::size_t m = 0; m < 12; ++m)
    {
      s.ndvi_by_month[m] = csv::parse_optional(t.at(r, c_ndvi[m]), NDVI_COLUMNS[m], k);
      check_range(t, s.ndvi_by_month[m], -1.0, 1.0, NDVI_COLUMNS[m], r);
    }
    out.push_back(s);
  }
  return out;
}
std::vector<FwiRecord> parse_fwi(const csv::Table& t)
{
  const auto c_date = t.column("date");
  const auto c_row = t.column("row");
  const auto c_col = t.column("col");
  const std::array<std::size_t, 6> cols{
    t.column("ffmc"), t.column("dmc"), t.column("dc"), t.column("isi"), t.column("bui"), t.column("fwi")};
  std::vector<FwiRecord> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    const auto k = r + 1;
    FwiRecord f;
    f.date = date_field(t, r, c_date);
    f.cell = cell_field(t, r, c_row, c_col, geo::WEATHER_GRID);
    f.ffmc = csv::parse_optional(t.at(r, cols[0]), "ffmc", k);
    f.dmc = csv::parse_optional(t.at(r, cols[1]), "dmc", k);
    f.dc = csv::parse_optional(t.at(r, cols[2]), "dc", k);
    f.isi = csv::parse_optional(t.at(r, cols[3]), "isi", k);
    f.bui = csv::parse_optional(t.at(r, cols[4]), "bui", k);
    f.fwi = csv::parse_optional(t.at(r, cols[5]), "fwi", k);
    check_range(t, f.ffmc, 0.0, 101.0, "ffmc", r);
    for (const auto* v : {&f.dmc, &f.dc, &f.isi, &f.bui, &f.fwi})
    {
      check_range(t, *v, 0.0, INFINITY, "fire weather index", r);
    }
    out.push_back(f);
  }
  check_unique_keys(t, out);
  return out;
}
std::vector<WildfireEvent> read_fires(const std::filesystem::path& path)
{
  return parse_fires(csv::Table::read(path));
}
std::vector<ThunderRecord> read_thunder(const std::filesystem::path& path)
{
  return parse_thunder(csv::Table::read(path));
}
std::vector<WeatherDay> read_weather(const std::filesystem::path& path)
{
  return parse_weather(csv::Table::read(path));
}
std::vector<StaticCell> read_static(const std::filesystem::path& path)
{
  return parse_static(csv::Table::read(path));
}
std::vector<FwiRecord> read_fwi(const std::filesystem::path& path)
{
  return parse_fwi(csv::Table::read(path));
}
std::string write_fires(const std::span<const WildfireEvent> fires)
{
  csv::Writer w({"fire_id", "lat", "lon", "ignition_date", "duration_days", "total_burned_ha", "first_day_burned_ha"});
  for (const auto& f : fires)
  {
    w.field(f.fire_id)
      .field(f.ignition.lat)
      .field(f.ignition.lon)
      .field(format_date(f.ignition_date))
      .field(f.duration_days)
      .field(f.total_burned_ha)
      .field(f.first_day_burned_ha);
    w.end_row();
  }
  return w.str();
}
std::string write_thunder(const std::span<const ThunderRecord> thunder)
{
  csv::Writer w({"date", "row", "col", "thunder_hours"});
  for (const auto& t : thunder)
  {
    w.field(format_date(t.date)).field(t.cell.row).field(t.cell.col).field(t.thunder_hours);
    w.end_row();
  }
  return w.str();
}
std::string write_weather(const std::span<const WeatherDay> weather)
{
  csv::Writer w({"date", "row", "col", "t_c", "rh_pct", "prec_mm", "wind_u_ms", "wind_v_ms", "sm", "water_mm"});
  for (const auto& d : weather)
  {
    w.field(format_date(d.date))
      .field(d.cell.row)
      .field(d.cell.col)
      .field(d.t_c)
      .field(d.rh_pct)
      .field(d.prec_mm)
      .field(d.wind_u_ms)
      .field(d.wind_v_ms)
      .field(d.sm)
      .field(d.water_mm);
    w.end_row();
  }
  return w.str();
}
std::string write_static(const std::span<const StaticCell> cells)
{
  std::vector<std::string> header{"row", "col", "low_veg", "high_veg", "pop", "historical_fires"};
  header.insert(header.end(), std::begin(NDVI_COLUMNS), std::end(NDVI_COLUMNS));
  csv::Writer w(header);
  for (const auto& s : cells)
  {
    w.field(s.cell.row).field(s.cell.col).field(s.low_veg).field(s.high_veg).field(s.pop).field(s.historical_fires);
    for (const auto& v : s.ndvi_by_month)
    {
      w.field(v);
    }
    w.end_row();
  }
  return w.str();
}
std::string write_fwi(const std::span<const FwiRecord> records)
{
  csv::Writer w({"date", "row", "col", "ffmc", "dmc", "dc", "isi", "bui", "fwi"});
  for (const auto& f : records)
  {
    w.field(format_date(f.date))
      .field(f.cell.row)
      .field(f.cell.col)
      .field(f.ffmc)
      .field(f.dmc)
      .field(f.dc)
      .field(f.isi)
      .field(f.bui)
      .field(f.fwi);
    w.end_row();
  }
  return w.str();
}
StaticTable index_static(std::vector<StaticCell> cells)
{
  StaticTable out;
  for (auto& c : cells)
  {
    const auto key = c.cell;
    out.emplace(key, std::move(c));
  }
  return out;
}
}
