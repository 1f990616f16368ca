#pragma once
#include "lightfire/features.h"
#include "lightfire/geo.h"
#include "lightfire/models.h"
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lightfire::climate
{
struct RegionGrid
{
  double resolution_deg{2.5};
  [[nodiscard]] geo::GridSpec spec() const { return {resolution_deg, {-90.0, -180.0}}; }
  [[nodiscard]] geo::CellId region_of(const geo::GeoPoint& p) const { return geo::cell_of(p, spec()); }
};

struct RiskCell
{
  geo::CellId region;
  int year{0};
  double mean{0.0};
  std::size_t n{0};
};
/// Mean score per (region, year), ordered by region then year. Each group is summed in
/// sorted value order, so the result does not depend on input order.
std::vector<RiskCell> regional_risk(std::span<const geo::GeoPoint> anchors,
                                    std::span<const int> years,
                                    std::span<const double> scores,
                                    const RegionGrid& grid);

struct TrendCell
{
  geo::CellId region;
  double mean_annual_diff{0.0};
  std::size_t n_years{0};
  std::size_t n_samples{0};
};
struct TrendSummary
{
  std::vector<TrendCell> cells;
  std::optional<double> global_mean;
  std::optional<double> global_median;
  /// regions with fewer than two years
  std::size_t excluded{0};
};
/// Mean first difference per year of gap; input ordered as regional_risk returns it.
TrendSummary annual_trend(std::span<const RiskCell> risk);

/// Additive offsets. A region entry replaces the global offsets for that region.
struct ClimateDelta
{
  features::WeatherShift global;
  std::map<geo::CellId, features::WeatherShift> by_region;
  [[nodiscard]] const features::WeatherShift& for_region(const geo::CellId& r) const;
  void validate() const;
};

struct ProjectionCell
{
  geo::CellId region;
  std::size_t n{0};
  double risk_base{0.0};
  double risk_projected{0.0};
  std::optional<double> ratio;
  double difference{0.0};
};
struct Projection
{
  std::vector<ProjectionCell> cells;
  std::vector<double> base;
  std::vector<double> projected;
  std::size_t clamped{0};
  double mean_base{0.0};
  double mean_projected{0.0};
  std::optional<double> ratio;
};

/// Shift the RH, t and prec columns of each row by its region's delta and re-score.
/// Other columns stay as assembled. RH is clamped to [0, 100] and prec to >= 0.
Projection project(const models::Model& model,
                   const features::FeatureTable& table,
                   const ClimateDelta& delta,
                   const RegionGrid& grid);

/// Reassemble each sample from shifted weather so lagged precipitation and the computed
/// fire weather indices follow the delta. Samples that fail to assemble or carry an empty
/// model input are skipped in both arms.
Projection project_recompute(const models::Model& model,
                             std::span<const labeler::LabeledSample> samples,
                             const features::Tables& tables,
                             const ClimateDelta& delta,
                             const RegionGrid& grid);

std::string write_trend_grid(const TrendSummary& t);
std::string write_trend_summary(const TrendSummary& t, std::size_t n_samples);
std::string write_projection_grid(const Projection& p);
std::string write_projection_summary(const Projection& p, const ClimateDelta& delta, bool recompute);
std::string trend_geojson(const TrendSummary& t, const RegionGrid& grid);
std::string projection_geojson(const Projection& p, const RegionGrid& grid);
}
