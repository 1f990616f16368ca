#include "lightfire/geo.h"
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lightfire::geo
{
namespace
{
constexpr double DEG = std::numbers::pi / 180.0;
// relative slack applied before flooring, so grid-aligned decimal coordinates land
// in the cell they name rather than one below it
constexpr double FLOOR_SLACK = 1e-9;
std::int32_t floor_index(const double offset, const double res)
{
  return static_cast<std::int32_t>(std::floor(offset / res + FLOOR_SLACK));
}
}
double normalize_lon(double lon)
{
  if (lon >= -180.0 && lon < 180.0)
  {
    return lon;
  }
  lon = std::fmod(lon + 180.0, 360.0);
  if (lon < 0.0)
  {
    lon += 360.0;
  }
  lon -= 180.0;
  // fmod can round up to exactly 180
  return lon >= 180.0 ? -180.0 : lon;
}
GeoPoint make_point(const double lat, const double lon)
{
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0)
  {
    throw std::invalid_argument("invalid point (" + std::to_string(lat) + ", " + std::to_string(lon) + ")");
  }
  return GeoPoint{lat, normalize_lon(lon)};
}
double haversine_km(const GeoPoint& a, const GeoPoint& b)
{
  const double dlat = (b.lat - a.lat) * DEG;
  const double dlon = (b.lon - a.lon) * DEG;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(a.lat * DEG) * std::cos(b.lat * DEG) * s2 * s2;
  return 2.0 * EARTH_RADIUS_KM * std::asin(std::min(1.0, std::sqrt(h)));
}
void GridSpec::validate() const
{
  if (!(resolution_deg > 0.0) || !std::isfinite(resolution_deg))
  {
    throw std::invalid_argument("grid resolution must be positive");
  }
  const double n = 360.0 / resolution_deg;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
  {
    throw std::invalid_argument("grid resolution must divide 360");
  }
}
std::int32_t GridSpec::rows() const
{
  return static_cast<std::int32_t>(std::lround(180.0 / resolution_deg));
}
std::int32_t GridSpec::cols() const
{
  return static_cast<std::int32_t>(std::lround(360.0 / resolution_deg));
}
GeoPoint GridSpec::corner(const CellId& c) const
{
  return GeoPoint{origin.lat + c.row * resolution_deg, normalize_lon(origin.lon + c.col * resolution_deg)};
}
GeoPoint GridSpec::center(const CellId& c) const
{
  return GeoPoint{origin.lat + (c.row + 0.5) * resolution_deg,
                  normalize_lon(origin.lon + (c.col + 0.5) * resolution_deg)};
}
CellId cell_of(const GeoPoint& p, const GridSpec& spec)
{
  const auto nrows = spec.rows();
  const auto ncols = spec.cols();
  auto row = floor_index(p.lat - spec.origin.lat, spec.resolution_deg);
  row = std::clamp(row, 0, nrows - 1);
  auto col = floor_index(p.lon - spec.origin.lon, spec.resolution_deg) % ncols;
  if (col < 0)
  {
    col += ncols;
  }
  return CellId{row, col};
}
SpatialIndex::SpatialIndex(const std::span<const GeoPoint> points, const GridSpec spec)
  : spec_(spec), points_(points.begin(), points.end())
{
  spec_.validate();
  for (std::size_t h = 0; h < points_.size(); ++h)
  {
    buckets_[cell_key(cell_of(points_[h], spec_))].push_back(h);
  }
}
const std::vector<std::size_t>* SpatialIndex::bucket(const CellId& c) const
{
  const auto it = buckets_.find(cell_key(c));
  return it == buckets_.end() ? nullptr : &it->second;
}
std::vector<std::size_t> SpatialIndex::neighbors_within(const GeoPoint& center, const double radius_km) const
{
  std::vector<std::size_t> out;
  if (!(radius_km > 0.0) || points_.empty())
  {
    return out;
  }
  const auto keep = [&](const std::size_t h) {
    if (haversine_km(center, points_[h]) <= radius_km)
    {
      out.push_back(h);
    }
  };
  const double res = spec_.resolution_deg;
  const auto nrows = spec_.rows();
  const auto ncols = spec_.cols();
  // great-circle distance bounds the latitude separation from below
  const double dlat = radius_km / KM_PER_DEGREE;
  const auto row_lo = std::max(0, floor_index(center.lat - dlat - spec_.origin.lat, res) - 1);
  const auto row_hi = std::min(nrows - 1, floor_index(center.lat + dlat - spec_.origin.lat, res) + 1);
  bool all_cols = std::abs(center.lat) + dlat >= 90.0;
  std::int32_t half_cols = 0;
  if (!all_cols)
  {
    // longitude half-width of a spherical cap
    const double s = std::sin(radius_km / EARTH_RADIUS_KM) / std::cos(center.lat * DEG);
    if (s >= 1.0)
    {
      all_cols = true;
    }
    else
    {
      half_cols = static_cast<std::int32_t>(std::ceil(std::asin(s) / DEG / res)) + 1;
      all_cols = 2 * half_cols + 1 >= ncols;
    }
  }
  const std::int64_t window_cells =
    static_cast<std::int64_t>(row_hi - row_lo + 1) * (all_cols ? ncols : 2 * half_cols + 1);
  if (window_cells >= static_cast<std::int64_t>(buckets_.size()))
  {
    // sparse index: cheaper to test every bucket against the window
    const auto c0 = cell_of(center, spec_).col;
    for (const auto& [key, handles] : buckets_)
    {
      const auto cell = cell_from_key(key);
      if (cell.row < row_lo || cell.row > row_hi)
      {
        continue;
      }
      if (!all_cols)
      {
        auto dc = std::abs(cell.col - c0);
        dc = std::min(dc, ncols - dc);
        if (dc > half_cols)
        {
          continue;
        }
      }
      for (const auto h : handles)
      {
        keep(h);
      }
    }
  }
  else
  {
    const auto c0 = cell_of(center, spec_).col;
    for (auto r = row_lo; r <= row_hi; ++r)
    {
      if (all_cols)
      {
        for (std::int32_t c = 0; c < ncols; ++c)
        {
          if (const auto* b = bucket(CellId{r, c}))
          {
            for (const auto h : *b)
            {
              keep(h);
            }
          }
        }
        continue;
      }
      for (auto off = -half_cols; off <= half_cols; ++off)
      {
        auto c = (c0 + off) % ncols;
        if (c < 0)
        {
          c += ncols;
        }
        if (const auto* b = bucket(CellId{r, c}))
        {
          for (const auto h : *b)
          {
            keep(h);
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}
}
