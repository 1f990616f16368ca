#include "lightfire/labeler.h"
#include "lightfire/util.h"
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace lightfire::labeler
{
namespace
{
std::vector<geo::GeoPoint> group_points(std::span<const geo::GeoPoint> points,
                                        std::span<const Date> dates,
                                        std::vector<std::vector<Date>>& grouped)
{
  if (points.size() != dates.size())
  {
    throw std::invalid_argument("points and dates differ in length");
  }
  std::map<std::pair<double, double>, std::size_t> slot;
  std::vector<geo::GeoPoint> unique;
  for (std::size_t i = 0; i < points.size(); ++i)
  {
    const auto key = std::make_pair(points[i].lat, points[i].lon);
    auto it = slot.find(key);
    if (it == slot.end())
    {
      it = slot.emplace(key, unique.size()).first;
      unique.push_back(points[i]);
      grouped.emplace_back();
    }
    grouped[it->second].push_back(dates[i]);
  }
  for (auto& d : grouped)
  {
    std::sort(d.begin(), d.end());
  }
  return unique;
}
std::string cell_origin(const char* prefix, const geo::CellId& c)
{
  return std::string(prefix) + ":" + std::to_string(c.row) + ":" + std::to_string(c.col);
}
}
const char* split_name(const Split s)
{
  switch (s)
  {
    case Split::train:
      return "train";
    case Split::test:
      return "test";
    case Split::holdout:
      return "holdout";
  }
  return "train";
}
Split parse_split(const std::string_view s)
{
  if (s == "train")
  {
    return Split::train;
  }
  if (s == "test")
  {
    return Split::test;
  }
  if (s == "holdout")
  {
    return Split::holdout;
  }
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}
void LabelingConfig::validate() const
{
  if (!(radius_km > 0.0))
  {
    throw std::invalid_argument("radius_km must be positive");
  }
  if (holdover_days < 0)
  {
    throw std::invalid_argument("holdover_days must be non-negative");
  }
  if (min_duration_days < 1)
  {
    throw std::invalid_argument("min_duration_days must be at least 1");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
  {
    throw std::invalid_argument("test_fraction must lie in [0, 1)");
  }
}
Centroid centroid_ignition(const std::span<const geo::GeoPoint> polygon)
{
  if (polygon.size() < 3)
  {
    throw std::invalid_argument("polygon needs at least 3 vertices");
  }
  // local equirectangular plane about the first vertex, longitudes unwrapped
  const auto ref = polygon.front();
  const double k = std::cos(ref.lat * std::numbers::pi / 180.0);
  std::vector<std::pair<double, double>> xy;
  xy.reserve(polygon.size());
  for (const auto& p : polygon)
  {
    double dlon = p.lon - ref.lon;
    if (dlon > 180.0)
    {
      dlon -= 360.0;
    }
    else if (dlon < -180.0)
    {
      dlon += 360.0;
    }
    xy.emplace_back(dlon * k, p.lat - ref.lat);
  }
  double area2 = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < xy.size(); ++i)
  {
    const auto& [x0, y0] = xy[i];
    const auto& [x1, y1] = xy[(i + 1) % xy.size()];
    const double cross = x0 * y1 - x1 * y0;
    area2 += cross;
    cx += (x0 + x1) * cross;
    cy += (y0 + y1) * cross;
  }
  Centroid out;
  double mx = 0.0;
  double my = 0.0;
  double extent = 0.0;
  for (const auto& [x, y] : xy)
  {
    extent = std::max({extent, std::abs(x), std::abs(y)});
  }
  if (std::abs(area2) <= 1e-12 * std::max(extent * extent, 1e-300))
  {
    for (const auto& [x, y] : xy)
    {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    out.degenerate = true;
  }
  else
  {
    mx = cx / (3.0 * area2);
    my = cy / (3.0 * area2);
  }
  const double lon = k > 0.0 ? ref.lon + mx / k : ref.lon;
  out.point = geo::make_point(std::clamp(ref.lat + my, -90.0, 90.0), lon);
  return out;
}
TimedPointIndex::TimedPointIndex(const std::span<const geo::GeoPoint> points,
                                 const std::span<const Date> dates,
                                 const geo::GridSpec spec)
  : index_(group_points(points, dates, dates_), spec)
{ }
bool TimedPointIndex::any_within(const geo::GeoPoint& p, const double radius_km, const Date from, const Date to) const
{
  if (from > to)
  {
    return false;
  }
  for (const auto h : index_.neighbors_within(p, radius_km))
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
TimedPointIndex thunder_index(const std::span<const ingest::ThunderRecord> thunder)
{
  std::vector<geo::GeoPoint> pts;
  std::vector<Date> dates;
  pts.reserve(thunder.size());
  dates.reserve(thunder.size());
  for (const auto& t : thunder)
  {
    pts.push_back(geo::THUNDER_GRID.center(t.cell));
    dates.push_back(t.date);
  }
  return TimedPointIndex(pts, dates, geo::THUNDER_GRID);
}
TimedPointIndex fire_index(const std::span<const ingest::WildfireEvent> fires)
{
  std::vector<geo::GeoPoint> pts;
  std::vector<Date> dates;
  pts.reserve(fires.size());
  dates.reserve(fires.size());
  for (const auto& f : fires)
  {
    pts.push_back(f.ignition);
    dates.push_back(f.ignition_date);
  }
  return TimedPointIndex(pts, dates, geo::THUNDER_GRID);
}
ingest::IgnitionCause classify_fire(const ingest::WildfireEvent& fire,
                                    const TimedPointIndex& thunder_idx,
                                    const LabelingConfig& cfg)
{
  const auto from = fire.ignition_date - std::chrono::days{cfg.holdover_days};
  return thunder_idx.any_within(fire.ignition, cfg.radius_km, from, fire.ignition_date)
         ? ingest::IgnitionCause::lightning
         : ingest::IgnitionCause::anthropogenic;
}
std::vector<std::size_t> eligible_negatives(const std::span<const ingest::ThunderRecord> thunder,
                                            const TimedPointIndex& fire_idx,
                                            const LabelingConfig& cfg)
{
  std::vector<char> ok(thunder.size(), 0);
  parallel_for(thunder.size(), [&](const std::size_t i) {
    const auto& t = thunder[i];
    ok[i] = fire_idx.any_within(
              geo::THUNDER_GRID.center(t.cell), cfg.radius_km, t.date, t.date + std::chrono::days{cfg.holdover_days})
            ? 0
            : 1;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ok.size(); ++i)
  {
    if (ok[i] != 0)
    {
      out.push_back(i);
    }
  }
  return out;
}
std::vector<ingest::ThunderRecord> sample_negatives(const std::span<const ingest::ThunderRecord> thunder,
                                                    const TimedPointIndex& fire_idx,
                                                    const std::size_t n,
                                                    const LabelingConfig& cfg,
                                                    const std::uint64_t seed)
{
  const auto eligible = eligible_negatives(thunder, fire_idx, cfg);
  if (eligible.size() < n)
  {
    throw std::runtime_error("insufficient eligible negatives: need " + std::to_string(n) + ", have "
                             + std::to_string(eligible.size()));
  }
  Rng rng(seed);
  auto picks = sample_without_replacement(eligible.size(), n, rng);
  std::sort(picks.begin(), picks.end());
  std::vector<ingest::ThunderRecord> out;
  out.reserve(n);
  for (const auto p : picks)
  {
    out.push_back(thunder[eligible[p]]);
  }
  return out;
}
StudyDomain domain_of(const ingest::WeatherTable& weather, const int lookback_days)
{
  StudyDomain d;
  bool first = true;
  for (const auto& [cell, series] : weather.cells())
  {
    if (series.empty())
    {
      continue;
    }
    d.weather_cells.push_back(cell);
    const auto lo = series.front().date + std::chrono::days{lookback_days};
    const auto hi = series.back().date;
    if (first)
    {
      d.first = lo;
      d.last = hi;
      first = false;
    }
    d.first = std::max(d.first, lo);
    d.last = std::min(d.last, hi);
  }
  if (first)
  {
    throw std::runtime_error("weather table is empty; no study domain");
  }
  return d;
}
std::vector<QuietAnchor> sample_quiet_anchors(const StudyDomain& domain,
                                              const TimedPointIndex& thunder_idx,
                                              const TimedPointIndex& fire_idx,
                                              const std::size_t n,
                                              const LabelingConfig& cfg,
                                              const std::uint64_t seed)
{
  constexpr std::uint64_t SUB = 25;  // thunder cells per weather cell
  const auto days = days_between(domain.first, domain.last) + 1;
  if (domain.weather_cells.empty() || days <= 0)
  {
    throw std::runtime_error("insufficient eligible negatives: empty study domain");
  }
  const std::uint64_t pool = domain.weather_cells.size() * SUB * static_cast<std::uint64_t>(days);
  Rng rng(seed);
  std::unordered_set<std::uint64_t> tried;
  std::vector<std::pair<std::uint64_t, QuietAnchor>> out;
  // rejection from the uniform pool is uniform over the eligible subset
  const std::uint64_t max_attempts = std::min<std::uint64_t>(pool, 50 * static_cast<std::uint64_t>(n) + 10000);
  while (out.size() < n && tried.size() < max_attempts)
  {
    const auto k = rng.index(pool);
    if (!tried.insert(k).second)
    {
      continue;
    }
    const auto day = static_cast<long>(k % static_cast<std::uint64_t>(days));
    const auto sub = (k / static_cast<std::uint64_t>(days)) % SUB;
    const auto wc = domain.weather_cells[k / static_cast<std::uint64_t>(days) / SUB];
    const geo::CellId tc{wc.row * 5 + static_cast<std::int32_t>(sub / 5), wc.col * 5 + static_cast<std::int32_t>(sub % 5)};
    const Date date = domain.first + std::chrono::days{day};
    const auto p = geo::THUNDER_GRID.center(tc);
    if (thunder_idx.any_within(p, cfg.radius_km, date - std::chrono::days{cfg.holdover_days}, date))
    {
      continue;
    }
    if (fire_idx.any_within(p, cfg.radius_km, date, date + std::chrono::days{cfg.holdover_days}))
    {
      continue;
    }
    out.emplace_back(k, QuietAnchor{tc, date});
  }
  if (out.size() < n)
  {
    throw std::runtime_error("insufficient eligible negatives: found " + std::to_string(out.size()) + " quiet anchors, need "
                             + std::to_string(n));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second.date, a.second.thunder_cell) < std::tie(b.second.date, b.second.thunder_cell);
  });
  std::vector<QuietAnchor> anchors;
  anchors.reserve(out.size());
  for (const auto& [k, a] : out)
  {
    anchors.push_back(a);
  }
  return anchors;
}
void assign_splits(std::vector<LabeledSample>& samples, const LabelingConfig& cfg)
{
  Rng rng(derive_seed(cfg.seed, 0x5911));
  std::set<int> years;
  for (const auto& s : samples)
  {
    if (year_of(s.date) != cfg.holdout_year)
    {
      years.insert(year_of(s.date));
    }
  }
  std::set<int> test_years;
  if (cfg.split_mode == SplitMode::year && !years.empty())
  {
    std::vector<int> ys(years.begin(), years.end());
    rng.shuffle(ys);
    auto k = static_cast<std::size_t>(std::lround(cfg.test_fraction * static_cast<double>(ys.size())));
    if (cfg.test_fraction > 0.0 && ys.size() >= 2)
    {
      k = std::clamp<std::size_t>(k, 1, ys.size() - 1);
    }
    test_years.insert(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(std::min(k, ys.size())));
  }
  for (auto& s : samples)
  {
    // one draw per row regardless of outcome keeps tags stable under holdout changes
    const double u = rng.uniform();
    if (year_of(s.date) == cfg.holdout_year)
    {
      s.split = Split::holdout;
    }
    else if (cfg.split_mode == SplitMode::year)
    {
      s.split = test_years.contains(year_of(s.date)) ? Split::test : Split::train;
    }
    else
    {
      s.split = u < cfg.test_fraction ? Split::test : Split::train;
    }
  }
}
Dataset build_dataset(const std::span<const ingest::WildfireEvent> fires,
                      const std::span<const ingest::ThunderRecord> thunder,
                      const LabelingConfig& cfg,
                      const DatasetKind kind,
                      const StudyDomain* domain)
{
  cfg.validate();
  Dataset ds;
  auto& rep = ds.report;
  rep.fires_in = fires.size();
  const auto t_idx = thunder_index(thunder);
  std::vector<const ingest::WildfireEvent*> kept;
  for (const auto& f : fires)
  {
    if (f.duration_days < cfg.min_duration_days)
    {
      ++rep.short_fires;
      continue;
    }
    kept.push_back(&f);
  }
  std::vector<ingest::IgnitionCause> cause(kept.size());
  parallel_for(kept.size(), [&](const std::size_t i) { cause[i] = classify_fire(*kept[i], t_idx, cfg); });
  const auto wanted = kind == DatasetKind::lightning ? ingest::IgnitionCause::lightning
                                                     : ingest::IgnitionCause::anthropogenic;
  for (std::size_t i = 0; i < kept.size(); ++i)
  {
    (cause[i] == ingest::IgnitionCause::lightning ? rep.lightning : rep.anthropogenic)++;
    if (cause[i] != wanted)
    {
      continue;
    }
    LabeledSample s;
    s.anchor = kept[i]->ignition;
    s.date = kept[i]->ignition_date;
    s.label = true;
    s.origin = kept[i]->fire_id;
    ds.samples.push_back(std::move(s));
  }
  rep.positives = ds.samples.size();
  // every recorded ignition blocks negatives, including short fires
  const auto f_idx = fire_index(fires);
  const auto neg_seed = derive_seed(cfg.seed, kind == DatasetKind::lightning ? 0x4e47 : 0x5157);
  if (kind == DatasetKind::lightning)
  {
    for (const auto& t : sample_negatives(thunder, f_idx, rep.positives, cfg, neg_seed))
    {
      LabeledSample s;
      s.anchor = geo::THUNDER_GRID.center(t.cell);
      s.date = t.date;
      s.origin = cell_origin("thunder", t.cell);
      ds.samples.push_back(std::move(s));
    }
  }
  else
  {
    if (domain == nullptr)
    {
      throw std::invalid_argument("anthropogenic dataset requires a study domain");
    }
    for (const auto& a : sample_quiet_anchors(*domain, t_idx, f_idx, rep.positives, cfg, neg_seed))
    {
      LabeledSample s;
      s.anchor = geo::THUNDER_GRID.center(a.thunder_cell);
      s.date = a.date;
      s.origin = cell_origin("quiet", a.thunder_cell);
      ds.samples.push_back(std::move(s));
    }
  }
  rep.negatives = ds.samples.size() - rep.positives;
  std::stable_sort(ds.samples.begin(), ds.samples.end(), [](const LabeledSample& a, const LabeledSample& b) {
    return std::tie(a.date, a.anchor.lat, a.anchor.lon, a.label, a.origin)
         < std::tie(b.date, b.anchor.lat, b.anchor.lon, b.label, b.origin);
  });
  assign_splits(ds.samples, cfg);
  for (const auto& s : ds.samples)
  {
    (s.split == Split::train ? rep.train : s.split == Split::test ? rep.test : rep.holdout)++;
  }
  if (rep.train == 0)
  {
    ds.report.warnings.emplace_back("training set empty: every sample falls in the holdout year or test split");
  }
  if (rep.positives == 0)
  {
    ds.report.warnings.emplace_back("no positive samples");
  }
  return ds;
}
std::string write_labeled(const std::span<const LabeledSample> samples)
{
  csv::Writer w({"anchor_lat", "anchor_lon", "date", "label", "origin", "split"});
  for (const auto& s : samples)
  {
    w.field(s.anchor.lat)
      .field(s.anchor.lon)
      .field(format_date(s.date))
      .field(s.label ? 1 : 0)
      .field(s.origin)
      .field(split_name(s.split));
    w.end_row();
  }
  return w.str();
}
std::vector<LabeledSample> parse_labeled(const csv::Table& t)
{
  const auto c_lat = t.column("anchor_lat");
  const auto c_lon = t.column("anchor_lon");
  const auto c_date = t.column("date");
  const auto c_label = t.column("label");
  const auto c_origin = t.column("origin");
  const auto c_split = t.column("split");
  std::vector<LabeledSample> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    LabeledSample s;
    s.anchor = geo::make_point(csv::parse_double(t.at(r, c_lat), "anchor_lat", r + 1),
                               csv::parse_double(t.at(r, c_lon), "anchor_lon", r + 1));
    try
    {
      s.date = parse_date(t.at(r, c_date));
      s.split = parse_split(t.at(r, c_split));
    }
    catch (const std::invalid_argument& e)
    {
      throw std::runtime_error(t.source() + ": " + e.what() + " at row " + std::to_string(r + 1));
    }
    const auto label = csv::parse_int(t.at(r, c_label), "label", r + 1);
    if (label != 0 && label != 1)
    {
      throw std::runtime_error(t.source() + ": label out of range at row " + std::to_string(r + 1));
    }
    s.label = label == 1;
    s.origin = t.at(r, c_origin);
    out.push_back(std::move(s));
  }
  return out;
}
std::vector<LabeledSample> read_labeled(const std::filesystem::path& path)
{
  return parse_labeled(csv::Table::read(path));
}
}
