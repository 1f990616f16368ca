#include "lightfire/climate.h"
#include "lightfire/csv.h"
#include "lightfire/util.h"
#include <nlohmann/json.hpp>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lightfire::climate
{
namespace
{
double sorted_mean(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (const double x : v)
  {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

std::optional<double> median(std::vector<double> v)
{
  if (v.empty())
  {
    return std::nullopt;
  }
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<std::size_t> column_positions(const std::vector<std::string>& wanted, const std::vector<std::string>& have)
{
  std::vector<std::size_t> pos;
  for (const auto& w : wanted)
  {
    const auto it = std::find(have.begin(), have.end(), w);
    if (it == have.end())
    {
      throw std::invalid_argument("feature table has no column " + w + " required by the model");
    }
    pos.push_back(static_cast<std::size_t>(it - have.begin()));
  }
  return pos;
}

std::optional<std::size_t> position_of(const std::vector<std::string>& names, const char* name)
{
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
  {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - names.begin());
}

void aggregate(Projection& out, std::span<const geo::GeoPoint> anchors, const RegionGrid& grid)
{
  std::map<geo::CellId, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (std::size_t i = 0; i < anchors.size(); ++i)
  {
    auto& g = groups[grid.region_of(anchors[i])];
    g.first.push_back(out.base[i]);
    g.second.push_back(out.projected[i]);
  }
  for (auto& [region, g] : groups)
  {
    ProjectionCell c;
    c.region = region;
    c.n = g.first.size();
    c.risk_base = sorted_mean(std::move(g.first));
    c.risk_projected = sorted_mean(std::move(g.second));
    if (c.risk_base > 0.0)
    {
      c.ratio = c.risk_projected / c.risk_base;
    }
    c.difference = c.risk_projected - c.risk_base;
    out.cells.push_back(c);
  }
  if (!out.base.empty())
  {
    out.mean_base = sorted_mean(out.base);
    out.mean_projected = sorted_mean(out.projected);
    if (out.mean_base > 0.0)
    {
      out.ratio = out.mean_projected / out.mean_base;
    }
  }
}

nlohmann::ordered_json region_polygon(const geo::CellId& c, const RegionGrid& grid)
{
  const auto lo = grid.spec().corner(c);
  const double r = grid.resolution_deg;
  nlohmann::ordered_json ring = nlohmann::ordered_json::array();
  for (const auto& [dlat, dlon] : std::array<std::pair<double, double>, 5>{{{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}}})
  {
    ring.push_back({lo.lon + dlon * r, lo.lat + dlat * r});
  }
  return {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}};
}

nlohmann::ordered_json optional_json(const std::optional<double>& v)
{
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json();
}
}

std::vector<RiskCell> regional_risk(const std::span<const geo::GeoPoint> anchors,
                                    const std::span<const int> years,
                                    const std::span<const double> scores,
                                    const RegionGrid& grid)
{
  if (anchors.size() != years.size() || anchors.size() != scores.size())
  {
    throw std::invalid_argument("regional_risk: input lengths differ");
  }
  std::map<std::pair<geo::CellId, int>, std::vector<double>> groups;
  for (std::size_t i = 0; i < anchors.size(); ++i)
  {
    groups[{grid.region_of(anchors[i]), years[i]}].push_back(scores[i]);
  }
  std::vector<RiskCell> out;
  out.reserve(groups.size());
  for (auto& [key, v] : groups)
  {
    const auto n = v.size();
    out.push_back(RiskCell{key.first, key.second, sorted_mean(std::move(v)), n});
  }
  return out;
}

TrendSummary annual_trend(const std::span<const RiskCell> risk)
{
  std::map<geo::CellId, std::vector<const RiskCell*>> by_region;
  for (const auto& c : risk)
  {
    by_region[c.region].push_back(&c);
  }
  TrendSummary out;
  std::vector<double> trends;
  for (auto& [region, cells] : by_region)
  {
    std::sort(cells.begin(), cells.end(), [](const RiskCell* a, const RiskCell* b) { return a->year < b->year; });
    std::size_t n_samples = 0;
    for (const auto* c : cells)
    {
      n_samples += c->n;
    }
    if (cells.size() < 2)
    {
      ++out.excluded;
      continue;
    }
    double sum = 0.0;
    for (std::size_t k = 1; k < cells.size(); ++k)
    {
      const int gap = cells[k]->year - cells[k - 1]->year;
      if (gap <= 0)
      {
        throw std::invalid_argument("annual_trend: duplicate year in a region");
      }
      sum += (cells[k]->mean - cells[k - 1]->mean) / gap;
    }
    const double t = sum / static_cast<double>(cells.size() - 1);
    out.cells.push_back(TrendCell{region, t, cells.size(), n_samples});
    trends.push_back(t);
  }
  if (!trends.empty())
  {
    out.global_mean = sorted_mean(trends);
    out.global_median = median(trends);
  }
  return out;
}

const features::WeatherShift& ClimateDelta::for_region(const geo::CellId& r) const
{
  const auto it = by_region.find(r);
  return it == by_region.end() ? global : it->second;
}

void ClimateDelta::validate() const
{
  const auto check = [](const features::WeatherShift& s, const std::string& where) {
    if (!std::isfinite(s.rh) || !std::isfinite(s.t) || !std::isfinite(s.prec))
    {
      throw std::invalid_argument("climate delta " + where + " has a non-finite offset");
    }
  };
  check(global, "global");
  for (const auto& [r, s] : by_region)
  {
    check(s, "region (" + std::to_string(r.row) + "," + std::to_string(r.col) + ")");
  }
}

Projection project(const models::Model& model,
                   const features::FeatureTable& table,
                   const ClimateDelta& delta,
                   const RegionGrid& grid)
{
  delta.validate();
  const auto pos = column_positions(model.features, table.names);
  const auto rh = position_of(model.features, "RH");
  const auto t = position_of(model.features, "t");
  const auto prec = position_of(model.features, "prec");
  const auto n = table.rows.size();
  Projection out;
  out.base.resize(n);
  out.projected.resize(n);
  std::vector<std::size_t> clamps(n, 0);
  std::vector<std::string> errors(n);
  parallel_for(n, [&](const std::size_t i) {
    const auto& row = table.rows[i];
    std::vector<double> x(pos.size());
    for (std::size_t j = 0; j < pos.size(); ++j)
    {
      const auto& v = row.values[pos[j]];
      if (!v)
      {
        errors[i] = "missing value in column " + model.features[j] + " at row " + std::to_string(i + 1);
        return;
      }
      x[j] = *v;
    }
    out.base[i] = model.predict_proba(x);
    const auto& s = delta.for_region(grid.region_of(row.anchor));
    if (rh)
    {
      const double v = x[*rh] + s.rh;
      x[*rh] = std::clamp(v, 0.0, 100.0);
      clamps[i] += x[*rh] != v;
    }
    if (t)
    {
      x[*t] += s.t;
    }
    if (prec)
    {
      const double v = x[*prec] + s.prec;
      x[*prec] = std::max(v, 0.0);
      clamps[i] += x[*prec] != v;
    }
    out.projected[i] = model.predict_proba(x);
  });
  for (std::size_t i = 0; i < n; ++i)
  {
    if (!errors[i].empty())
    {
      throw std::invalid_argument(errors[i]);
    }
    out.clamped += clamps[i];
  }
  std::vector<geo::GeoPoint> anchors;
  anchors.reserve(n);
  for (const auto& r : table.rows)
  {
    anchors.push_back(r.anchor);
  }
  aggregate(out, anchors, grid);
  return out;
}

Projection project_recompute(const models::Model& model,
                             const std::span<const labeler::LabeledSample> samples,
                             const features::Tables& tables,
                             const ClimateDelta& delta,
                             const RegionGrid& grid)
{
  delta.validate();
  std::map<geo::CellId, features::WeatherShift> shifts;
  for (const auto& [cell, series] : tables.weather->cells())
  {
    shifts[cell] = delta.for_region(grid.region_of(geo::WEATHER_GRID.center(cell)));
  }
  const auto full = features::FeatureSetConfig::model(5);
  features::Assembler::Options base_opts;
  base_opts.shift_lagged = true;
  base_opts.shift_fwi = true;
  auto shifted_opts = base_opts;
  shifted_opts.shifts = &shifts;
  const features::Assembler base_asm(tables, full, base_opts);
  const features::Assembler shift_asm(tables, full, shifted_opts);
  const auto pos = column_positions(model.features, base_asm.names());

  const auto n = samples.size();
  std::vector<std::optional<std::pair<double, double>>> scored(n);
  parallel_for(n, [&](const std::size_t i) {
    try
    {
      const auto a = base_asm.assemble(samples[i]);
      const auto b = shift_asm.assemble(samples[i]);
      std::vector<double> xa(pos.size());
      std::vector<double> xb(pos.size());
      for (std::size_t j = 0; j < pos.size(); ++j)
      {
        if (!a.values[pos[j]] || !b.values[pos[j]])
        {
          return;
        }
        xa[j] = *a.values[pos[j]];
        xb[j] = *b.values[pos[j]];
      }
      scored[i] = std::pair{model.predict_proba(xa), model.predict_proba(xb)};
    }
    catch (const std::runtime_error&)
    {
      // uncovered cell or date gap: sample skipped
    }
  });
  Projection out;
  out.clamped = shift_asm.clamped();
  std::vector<geo::GeoPoint> anchors;
  for (std::size_t i = 0; i < n; ++i)
  {
    if (scored[i])
    {
      out.base.push_back(scored[i]->first);
      out.projected.push_back(scored[i]->second);
      anchors.push_back(samples[i].anchor);
    }
  }
  aggregate(out, anchors, grid);
  return out;
}

std::string write_trend_grid(const TrendSummary& t)
{
  csv::Writer w({"region_row", "region_col", "mean_annual_diff", "n_years", "n_samples"});
  for (const auto& c : t.cells)
  {
    w.field(static_cast<long>(c.region.row))
      .field(static_cast<long>(c.region.col))
      .field(c.mean_annual_diff)
      .field(static_cast<long>(c.n_years))
      .field(static_cast<long>(c.n_samples));
    w.end_row();
  }
  return w.str();
}

std::string write_trend_summary(const TrendSummary& t, const std::size_t n_samples)
{
  nlohmann::ordered_json j;
  j["n_samples"] = n_samples;
  j["n_regions"] = t.cells.size();
  j["excluded_regions"] = t.excluded;
  j["global_mean_annual_diff"] = optional_json(t.global_mean);
  j["global_median_annual_diff"] = optional_json(t.global_median);
  return j.dump(2) + "\n";
}

std::string write_projection_grid(const Projection& p)
{
  csv::Writer w({"region_row", "region_col", "risk_base", "risk_projected", "ratio", "difference", "n_samples"});
  for (const auto& c : p.cells)
  {
    w.field(static_cast<long>(c.region.row))
      .field(static_cast<long>(c.region.col))
      .field(c.risk_base)
      .field(c.risk_projected)
      .field(c.ratio)
      .field(c.difference)
      .field(static_cast<long>(c.n));
    w.end_row();
  }
  return w.str();
}

std::string write_projection_summary(const Projection& p, const ClimateDelta& delta, const bool recompute)
{
  nlohmann::ordered_json j;
  j["mode"] = recompute ? "recompute" : "hold_constant";
  j["delta"] = {{"rh", delta.global.rh}, {"t", delta.global.t}, {"prec", delta.global.prec}};
  j["regional_overrides"] = delta.by_region.size();
  j["n_samples"] = p.base.size();
  j["n_regions"] = p.cells.size();
  j["clamped_values"] = p.clamped;
  j["mean_risk_base"] = p.mean_base;
  j["mean_risk_projected"] = p.mean_projected;
  j["ratio"] = optional_json(p.ratio);
  j["difference"] = p.mean_projected - p.mean_base;
  return j.dump(2) + "\n";
}

std::string trend_geojson(const TrendSummary& t, const RegionGrid& grid)
{
  nlohmann::ordered_json fc{{"type", "FeatureCollection"}, {"features", nlohmann::ordered_json::array()}};
  for (const auto& c : t.cells)
  {
    fc["features"].push_back({{"type", "Feature"},
                              {"geometry", region_polygon(c.region, grid)},
                              {"properties",
                               {{"region_row", c.region.row},
                                {"region_col", c.region.col},
                                {"mean_annual_diff", c.mean_annual_diff},
                                {"n_years", c.n_years},
                                {"n_samples", c.n_samples}}}});
  }
  return fc.dump() + "\n";
}

std::string projection_geojson(const Projection& p, const RegionGrid& grid)
{
  nlohmann::ordered_json fc{{"type", "FeatureCollection"}, {"features", nlohmann::ordered_json::array()}};
  for (const auto& c : p.cells)
  {
    fc["features"].push_back({{"type", "Feature"},
                              {"geometry", region_polygon(c.region, grid)},
                              {"properties",
                               {{"region_row", c.region.row},
                                {"region_col", c.region.col},
                                {"risk_base", c.risk_base},
                                {"risk_projected", c.risk_projected},
                                {"ratio", optional_json(c.ratio)},
                                {"difference", c.difference},
                                {"n_samples", c.n}}}});
  }
  return fc.dump() + "\n";
}
}
