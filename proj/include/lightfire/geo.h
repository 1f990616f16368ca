#pragma once
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace lightfire::geo
{
inline constexpr double EARTH_RADIUS_KM = 6371.0;
/// Great-circle length of one degree of arc on the fixed-radius sphere.
inline constexpr double KM_PER_DEGREE = EARTH_RADIUS_KM * 3.14159265358979323846 / 180.0;

struct GeoPoint
{
  double lat{0.0};
  double lon{0.0};
  bool operator==(const GeoPoint&) const = default;
};
/// Validates latitude in [-90, 90] and wraps longitude into [-180, 180).
/// Throws std::invalid_argument on non-finite or out-of-range latitude.
GeoPoint make_point(double lat, double lon);
double normalize_lon(double lon);

double haversine_km(const GeoPoint& a, const GeoPoint& b);

struct CellId
{
  std::int32_t row{0};
  std::int32_t col{0};
  auto operator<=>(const CellId&) const = default;
};

struct GridSpec
{
  double resolution_deg{0.05};
  GeoPoint origin{-90.0, -180.0};

  /// Throws std::invalid_argument unless resolution > 0 and divides 360.
  void validate() const;
  [[nodiscard]] std::int32_t rows() const;
  [[nodiscard]] std::int32_t cols() const;
  [[nodiscard]] GeoPoint center(const CellId& c) const;
  [[nodiscard]] GeoPoint corner(const CellId& c) const;
};
inline constexpr GridSpec THUNDER_GRID{0.05, {-90.0, -180.0}};
inline constexpr GridSpec WEATHER_GRID{0.25, {-90.0, -180.0}};

/// Half-open ownership: a point on a cell edge belongs to the cell above/right of the edge.
/// Latitude 90 is folded into the last row.
CellId cell_of(const GeoPoint& p, const GridSpec& spec);

/// 64-bit key for hashing a cell.
constexpr std::uint64_t cell_key(const CellId& c)
{
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.row)) << 32)
       | static_cast<std::uint32_t>(c.col);
}
constexpr CellId cell_from_key(const std::uint64_t k)
{
  return CellId{static_cast<std::int32_t>(k >> 32), static_cast<std::int32_t>(k & 0xffffffffULL)};
}

/// Bucketed point index on a fixed-resolution grid. Handles are positions in the
/// input span. Immutable after construction; queries are safe from many threads.
class SpatialIndex
{
public:
  SpatialIndex(std::span<const GeoPoint> points, GridSpec spec);

  /// Handles of all points with haversine distance <= radius_km, ascending.
  [[nodiscard]] std::vector<std::size_t> neighbors_within(const GeoPoint& center, double radius_km) const;
  /// Visit handles within radius in ascending order; stops early when fn returns false.
  template <class F>
  void for_each_within(const GeoPoint& center, double radius_km, F&& fn) const
  {
    for (const auto h : neighbors_within(center, radius_km))
    {
      if (!fn(h))
      {
        return;
      }
    }
  }
  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] const GeoPoint& point(std::size_t h) const { return points_[h]; }
  [[nodiscard]] std::size_t bucket_count() const { return buckets_.size(); }
  [[nodiscard]] const std::vector<std::size_t>* bucket(const CellId& c) const;
private:
  GridSpec spec_;
  std::vector<GeoPoint> points_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};
}
