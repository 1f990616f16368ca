#include "lightfire/fwi.h"
#include "lightfire/ingest.h"
#include "lightfire/util.h"
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace lightfire::ingest
{
namespace
{
double round_to(const double x, const double step)
{
  // divide by the integral inverse so 0.29 is stored as the double nearest 0.29
  const double inv = std::round(1.0 / step);
  return std::round(x * inv) / inv;
}
struct Moments
{
  double sum{0.0};
  double sum_sq{0.0};
  std::size_t n{0};
  void add(const double x)
  {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  [[nodiscard]] double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
  [[nodiscard]] double sd() const
  {
    if (n < 2)
    {
      return 1.0;
    }
    const double m = mean();
    const double v = std::max(sum_sq / static_cast<double>(n) - m * m, 0.0);
    return v > 0.0 ? std::sqrt(v) : 1.0;
  }
  [[nodiscard]] double z(const double x) const { return (x - mean()) / sd(); }
};
constexpr int SUBCELLS = 5;  // 0.05 degree thunder cells per 0.25 degree weather cell side

struct CellState
{
  geo::CellId cell;
  geo::GeoPoint center;
  std::vector<WeatherDay> weather;
  std::vector<fwi::DayIndices> indices;
  std::vector<std::vector<ThunderRecord>> storms;  // per day
};

// Unique-thunder-cell index used to keep anthropogenic fires clear of storms.
class ThunderGuard
{
public:
  explicit ThunderGuard(const std::vector<ThunderRecord>& thunder)
  {
    std::map<geo::CellId, std::vector<Date>> by_cell;
    for (const auto& t : thunder)
    {
      by_cell[t.cell].push_back(t.date);
    }
    std::vector<geo::GeoPoint> pts;
    for (auto& [cell, dates] : by_cell)
    {
      std::sort(dates.begin(), dates.end());
      pts.push_back(geo::THUNDER_GRID.center(cell));
      dates_.push_back(std::move(dates));
    }
    index_ = std::make_unique<geo::SpatialIndex>(pts, geo::THUNDER_GRID);
  }
  [[nodiscard]] bool any_within(const geo::GeoPoint& p, const double radius_km, const Date from, const Date to) const
  {
    for (const auto h : index_->neighbors_within(p, radius_km))
    {
      const auto& d = dates_[h];
      const auto it = std::lower_bound(d.begin(), d.end(), from);
      if (it != d.end() && *it <= to)
      {
        return true;
      }
    }
    return false;
  }
private:
  std::unique_ptr<geo::SpatialIndex> index_;
  std::vector<std::vector<Date>> dates_;
};
}
double IgnitionLaw::logit(const double z_ffmc, const double z_rh, const double z_prec, const double z_ndvi) const
{
  const double rest = intercept + w_prec * z_prec + w_ndvi * z_ndvi;
  if (shape == Shape::interaction)
  {
    return rest + w_ffmc * z_ffmc * z_rh;
  }
  return rest + w_ffmc * z_ffmc + w_rh * z_rh;
}
void SynthConfig::validate() const
{
  if (n_cells < 1 || n_days < 1 || spinup_days < 0 || spinup_days >= n_days)
  {
    throw std::invalid_argument("synth: n_cells, n_days and spinup_days must describe a non-empty study period");
  }
  if (!(lat_min < lat_max) || !(lon_min < lon_max) || lat_min < -89.0 || lat_max > 89.0 || lon_min < -180.0
      || lon_max > 180.0)
  {
    throw std::invalid_argument("synth: invalid bounding box");
  }
  for (const double p : {storm_rate, fire_base_rate, anthropogenic_rate, single_day_fraction, missing_rate})
  {
    if (!(p >= 0.0 && p <= 1.0))
    {
      throw std::invalid_argument("synth: rates must lie in [0, 1]");
    }
  }
  if (holdover_lag_max < 0 || guard_holdover_days < 0 || !(guard_radius_km > 0.0))
  {
    throw std::invalid_argument("synth: invalid holdover or guard settings");
  }
}
World synth_world(const SynthConfig& cfg)
{
  cfg.validate();
  World world;
  // study cells
  std::vector<geo::CellId> candidates;
  {
    const auto lo = geo::cell_of(geo::GeoPoint{cfg.lat_min, cfg.lon_min}, geo::WEATHER_GRID);
    const auto hi = geo::cell_of(geo::GeoPoint{cfg.lat_max, cfg.lon_max}, geo::WEATHER_GRID);
    for (auto r = lo.row; r < hi.row; ++r)
    {
      for (auto c = lo.col; c < hi.col; ++c)
      {
        candidates.push_back(geo::CellId{r, c});
      }
    }
  }
  if (candidates.size() < static_cast<std::size_t>(cfg.n_cells))
  {
    throw std::invalid_argument("synth: bounding box holds fewer cells than n_cells");
  }
  Rng pick_rng(derive_seed(cfg.seed, 1));
  std::vector<geo::CellId> cells;
  for (const auto i : sample_without_replacement(candidates.size(), static_cast<std::size_t>(cfg.n_cells), pick_rng))
  {
    cells.push_back(candidates[i]);
  }
  std::sort(cells.begin(), cells.end());

  // static layers
  Rng static_rng(derive_seed(cfg.seed, 2));
  for (const auto& c : cells)
  {
    StaticCell s;
    s.cell = c;
    const double low = round_to(static_rng.uniform(0.05, 0.6), 0.001);
    s.low_veg = low;
    s.high_veg = round_to(static_rng.uniform(0.0, 1.0 - low), 0.001);
    s.pop = round_to(std::exp(static_rng.normal(2.0, 1.5)), 0.01);
    s.historical_fires = round_to(static_rng.exponential(40.0), 0.01);
    const double base = static_rng.uniform(0.3, 0.65);
    const double amp = static_rng.uniform(0.1, 0.25);
    for (int m = 0; m < 12; ++m)
    {
      const double season = std::sin(2.0 * std::numbers::pi * (m - 3) / 12.0);
      s.ndvi_by_month[static_cast<std::size_t>(m)] = round_to(std::clamp(base + amp * season, -1.0, 1.0), 0.001);
    }
    world.statics.push_back(s);
  }
  const auto statics = index_static(world.statics);

  // weather, storms and fire weather per cell
  std::vector<CellState> states;
  states.reserve(cells.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
  {
    Rng rng(derive_seed(cfg.seed, 100 + ci));
    CellState st;
    st.cell = cells[ci];
    st.center = geo::WEATHER_GRID.center(st.cell);
    st.storms.resize(static_cast<std::size_t>(cfg.n_days));
    const double base_t = 24.0 - 0.6 * (st.center.lat - 30.0);
    const double amp_t = 11.0;
    double at = 0.0;
    double arh = 0.0;
    double sm = 0.28;
    double water = 0.2;
    for (int d = 0; d < cfg.n_days; ++d)
    {
      const Date date = cfg.start + std::chrono::days{d};
      const double season = std::sin(2.0 * std::numbers::pi * (day_of_year(date) - 105) / 365.25);
      at = 0.75 * at + rng.normal(0.0, 2.5);
      const double t = round_to(base_t - 4.0 + amp_t * season + at, 0.01);
      bool storm = false;
      if (d >= cfg.spinup_days)
      {
        storm = rng.bernoulli(cfg.storm_rate * std::clamp((t - 8.0) / 15.0, 0.0, 1.5));
      }
      double rain = 0.0;
      if (rng.bernoulli(0.28 - 0.1 * season))
      {
        rain += rng.exponential(5.0);
      }
      if (storm && rng.bernoulli(0.5))
      {
        rain += rng.exponential(4.0);
      }
      rain = round_to(rain, 0.01);
      arh = 0.6 * arh + rng.normal(0.0, 7.0);
      const double rh =
        round_to(std::clamp(70.0 - 1.3 * (t - base_t) - 12.0 * season + (rain > 0.0 ? 12.0 : 0.0) + arh, 5.0, 100.0),
                 0.01);
      const double u = round_to(rng.normal(0.0, 3.0), 0.01);
      const double v = round_to(rng.normal(0.0, 3.0), 0.01);
      sm = std::clamp(0.85 * sm + 0.15 * 0.28 + 0.006 * rain - 0.002 * std::max(t, 0.0), 0.02, 0.6);
      water = std::clamp(0.5 * water + 0.04 * rain, 0.0, 2.0);
      WeatherDay w;
      w.cell = st.cell;
      w.date = date;
      w.t_c = t;
      w.rh_pct = rh;
      w.prec_mm = rain;
      w.wind_u_ms = u;
      w.wind_v_ms = v;
      w.sm = round_to(sm, 0.001);
      w.water_mm = round_to(water, 0.001);
      st.weather.push_back(w);
      if (storm)
      {
        const auto k = 1 + rng.index(3);
        for (const auto sub : sample_without_replacement(SUBCELLS * SUBCELLS, k, rng))
        {
          ThunderRecord tr;
          tr.cell = geo::CellId{st.cell.row * SUBCELLS + static_cast<std::int32_t>(sub / SUBCELLS),
                                st.cell.col * SUBCELLS + static_cast<std::int32_t>(sub % SUBCELLS)};
          tr.date = date;
          tr.thunder_hours = 1 + static_cast<int>(rng.index(6));
          st.storms[static_cast<std::size_t>(d)].push_back(tr);
        }
        std::sort(st.storms[static_cast<std::size_t>(d)].begin(),
                  st.storms[static_cast<std::size_t>(d)].end(),
                  [](const ThunderRecord& a, const ThunderRecord& b) { return a.cell < b.cell; });
      }
    }
    std::vector<fwi::DailyWeather> fw;
    fw.reserve(st.weather.size());
    const auto band = fwi::band_for_latitude(st.center.lat);
    for (const auto& w : st.weather)
    {
      fw.push_back(fwi::DailyWeather{
        *w.t_c, *w.rh_pct, std::hypot(*w.wind_u_ms, *w.wind_v_ms) * 3.6, *w.prec_mm, month_of(w.date), band});
    }
    st.indices = fwi::roll_series(fwi::FwiState{}, fw);
    states.push_back(std::move(st));
  }

  // standardization pools for the planted laws
  Moments m_ffmc;
  Moments m_rh;
  Moments m_prec;
  Moments m_ndvi;
  Moments m_t;
  Moments m_sm;
  Moments m_pop;
  for (const auto& st : states)
  {
    const auto& s = statics.at(st.cell);
    m_pop.add(*s.pop);
    for (int d = cfg.spinup_days; d < cfg.n_days; ++d)
    {
      const auto& w = st.weather[static_cast<std::size_t>(d)];
      m_t.add(*w.t_c);
      m_sm.add(*w.sm);
      for (std::size_t k = 0; k < st.storms[static_cast<std::size_t>(d)].size(); ++k)
      {
        m_ffmc.add(st.indices[static_cast<std::size_t>(d)].codes.ffmc);
        m_rh.add(*w.rh_pct);
        m_prec.add(*w.prec_mm);
        m_ndvi.add(*s.ndvi_by_month[static_cast<std::size_t>(month_of(w.date) - 1)]);
      }
    }
  }

  struct PendingFire
  {
    WildfireEvent event;
    FireTruth truth;
  };
  std::vector<PendingFire> pending;
  Rng fire_rng(derive_seed(cfg.seed, 3));
  const auto fire_shape = [&](WildfireEvent& e) {
    e.duration_days =
      fire_rng.bernoulli(cfg.single_day_fraction) ? 1 : 2 + static_cast<int>(fire_rng.exponential(4.0));
    e.first_day_burned_ha = round_to(fire_rng.exponential(20.0), 0.01);
    e.total_burned_ha = round_to(e.first_day_burned_ha * (1.0 + fire_rng.exponential(3.0 * e.duration_days)), 0.01);
  };
  const auto last_day = cfg.start + std::chrono::days{cfg.n_days - 1};
  for (const auto& st : states)
  {
    const auto& s = statics.at(st.cell);
    for (int d = cfg.spinup_days; d < cfg.n_days; ++d)
    {
      const auto& w = st.weather[static_cast<std::size_t>(d)];
      const double ffmc = st.indices[static_cast<std::size_t>(d)].codes.ffmc;
      const double ndvi = *s.ndvi_by_month[static_cast<std::size_t>(month_of(w.date) - 1)];
      for (const auto& tr : st.storms[static_cast<std::size_t>(d)])
      {
        world.thunder.push_back(tr);
        const double p =
          cfg.fire_base_rate
          * sigmoid(cfg.planted.logit(m_ffmc.z(ffmc), m_rh.z(*w.rh_pct), m_prec.z(*w.prec_mm), m_ndvi.z(ndvi)));
        const bool ignite = fire_rng.bernoulli(p);
        world.storms.push_back(StormDraw{tr, ffmc, p, ignite});
        if (!ignite)
        {
          continue;
        }
        const auto lag = cfg.holdover_lag_max > 0 ? static_cast<int>(fire_rng.index(cfg.holdover_lag_max + 1)) : 0;
        PendingFire f;
        const auto corner = geo::THUNDER_GRID.corner(tr.cell);
        const double res = geo::THUNDER_GRID.resolution_deg;
        f.event.ignition = geo::make_point(round_to(corner.lat + res * fire_rng.uniform(0.05, 0.95), 1e-5),
                                           round_to(corner.lon + res * fire_rng.uniform(0.05, 0.95), 1e-5));
        f.event.ignition_date = std::min(tr.date + std::chrono::days{lag}, last_day);
        fire_shape(f.event);
        f.truth.cause = IgnitionCause::lightning;
        f.truth.storm = tr;
        pending.push_back(std::move(f));
      }
    }
  }
  std::sort(world.thunder.begin(), world.thunder.end(), [](const ThunderRecord& a, const ThunderRecord& b) {
    return std::tie(a.date, a.cell) < std::tie(b.date, b.cell);
  });

  // human-caused ignitions, kept clear of thunder in the labeling window
  if (cfg.anthropogenic_rate > 0.0)
  {
    const ThunderGuard guard(world.thunder);
    Rng anthro_rng(derive_seed(cfg.seed, 4));
    for (const auto& st : states)
    {
      const auto& s = statics.at(st.cell);
      const auto corner = geo::WEATHER_GRID.corner(st.cell);
      const double res = geo::WEATHER_GRID.resolution_deg;
      for (int d = cfg.spinup_days; d < cfg.n_days; ++d)
      {
        const auto& w = st.weather[static_cast<std::size_t>(d)];
        const double logit =
          cfg.anthro_intercept + cfg.anthro_w_pop * m_pop.z(*s.pop) + cfg.anthro_w_t * m_t.z(*w.t_c)
          + cfg.anthro_w_sm * m_sm.z(*w.sm);
        if (!anthro_rng.bernoulli(cfg.anthropogenic_rate * sigmoid(logit)))
        {
          continue;
        }
        const auto p = geo::make_point(round_to(corner.lat + res * anthro_rng.uniform(0.02, 0.98), 1e-5),
                                       round_to(corner.lon + res * anthro_rng.uniform(0.02, 0.98), 1e-5));
        // margin keeps the guard robust to rounding in downstream distance checks
        if (guard.any_within(p, cfg.guard_radius_km + 0.5, w.date - std::chrono::days{cfg.guard_holdover_days}, w.date))
        {
          continue;
        }
        PendingFire f;
        f.event.ignition = p;
        f.event.ignition_date = w.date;
        f.truth.cause = IgnitionCause::anthropogenic;
        pending.push_back(std::move(f));
        fire_shape(pending.back().event);
      }
    }
  }
  std::sort(pending.begin(), pending.end(), [](const PendingFire& a, const PendingFire& b) {
    return std::tie(a.event.ignition_date, a.event.ignition.lat, a.event.ignition.lon)
         < std::tie(b.event.ignition_date, b.event.ignition.lat, b.event.ignition.lon);
  });
  for (std::size_t i = 0; i < pending.size(); ++i)
  {
    char id[24];
    std::snprintf(id, sizeof(id), "F%06zu", i + 1);
    pending[i].event.fire_id = id;
    pending[i].truth.fire_id = id;
    world.fires.push_back(pending[i].event);
    world.truth.push_back(pending[i].truth);
  }

  Rng missing_rng(derive_seed(cfg.seed, 5));
  for (auto& st : states)
  {
    for (std::size_t d = 0; d < st.weather.size(); ++d)
    {
      auto w = st.weather[d];
      if (cfg.missing_rate > 0.0 && missing_rng.bernoulli(cfg.missing_rate))
      {
        w.water_mm.reset();
      }
      world.weather.push_back(w);
      if (cfg.write_fwi)
      {
        const auto& ix = st.indices[d];
        world.fwi.push_back(FwiRecord{
          st.cell, w.date, ix.codes.ffmc, ix.codes.dmc, ix.codes.dc, ix.derived.isi, ix.derived.bui, ix.derived.fwi});
      }
    }
  }
  return world;
}
std::string write_truth(const std::span<const FireTruth> truth)
{
  csv::Writer w({"fire_id", "cause", "storm_date", "storm_row", "storm_col"});
  for (const auto& t : truth)
  {
    w.field(t.fire_id).field(t.cause == IgnitionCause::lightning ? "lightning" : "anthropogenic");
    if (t.storm)
    {
      w.field(format_date(t.storm->date)).field(t.storm->cell.row).field(t.storm->cell.col);
    }
    else
    {
      w.field("").field("").field("");
    }
    w.end_row();
  }
  return w.str();
}
std::vector<std::filesystem::path> write_world(const World& world, const std::filesystem::path& dir, const bool with_fwi)
{
  std::vector<std::filesystem::path> paths{
    dir / "fires.csv", dir / "thunder.csv", dir / "weather.csv", dir / "static.csv", dir / "truth.csv"};
  write_text_file(paths[0], write_fires(world.fires));
  write_text_file(paths[1], write_thunder(world.thunder));
  write_text_file(paths[2], write_weather(world.weather));
  write_text_file(paths[3], write_static(world.statics));
  write_text_file(paths[4], write_truth(world.truth));
  if (with_fwi && !world.fwi.empty())
  {
    paths.push_back(dir / "fwi.csv");
    write_text_file(paths.back(), write_fwi(world.fwi));
  }
  return paths;
}
}
