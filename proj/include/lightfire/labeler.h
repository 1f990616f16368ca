#pragma once
#include "lightfire/date.h"
#include "lightfire/geo.h"
#include "lightfire/ingest.h"
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lightfire::labeler
{
enum class Split
{
  train,
  test,
  holdout
};
const char* split_name(Split s);
Split parse_split(std::string_view s);

enum class SplitMode
{
  row,
  year
};

enum class DatasetKind
{
  /// lightning fires against thunder cell-days without ignition
  lightning,
  /// human-caused fires against quiet days without fire or thunder
  anthropogenic
};

struct LabelingConfig
{
  double radius_km{10.0};
  /// Lookback before ignition, inclusive of the ignition day.
  int holdover_days{7};
  int min_duration_days{2};
  int holdout_year{2021};
  double test_fraction{0.2};
  SplitMode split_mode{SplitMode::row};
  std::uint64_t seed{0};
  void validate() const;
};

struct LabeledSample
{
  geo::GeoPoint anchor;
  Date date;
  bool label{false};
  /// fire_id for positives, `thunder:<row>:<col>` or `quiet:<row>:<col>` for negatives
  std::string origin;
  Split split{Split::train};
};

struct Centroid
{
  geo::GeoPoint point;
  /// zero-area ring; point is the vertex mean
  bool degenerate{false};
};
/// Area-weighted centroid of a ring in a local tangent plane. Throws
/// std::invalid_argument for fewer than three vertices.
Centroid centroid_ignition(std::span<const geo::GeoPoint> polygon);

/// Dated points bucketed on a grid; identical points share one entry with a sorted date list.
class TimedPointIndex
{
public:
  TimedPointIndex(std::span<const geo::GeoPoint> points, std::span<const Date> dates, geo::GridSpec spec);
  /// True iff some indexed event within radius_km of p is dated in [from, to].
  [[nodiscard]] bool any_within(const geo::GeoPoint& p, double radius_km, Date from, Date to) const;
  [[nodiscard]] std::size_t sites() const { return dates_.size(); }
private:
  // dates_ is filled while index_ is built, so it must be declared first
  std::vector<std::vector<Date>> dates_;
  geo::SpatialIndex index_;
};
TimedPointIndex thunder_index(std::span<const ingest::ThunderRecord> thunder);
TimedPointIndex fire_index(std::span<const ingest::WildfireEvent> fires);

ingest::IgnitionCause classify_fire(const ingest::WildfireEvent& fire,
                                    const TimedPointIndex& thunder_idx,
                                    const LabelingConfig& cfg);

/// Positions of thunder records with no fire ignition within radius during [date, date + holdover].
std::vector<std::size_t> eligible_negatives(std::span<const ingest::ThunderRecord> thunder,
                                            const TimedPointIndex& fire_idx,
                                            const LabelingConfig& cfg);
/// n uniform draws without replacement from the eligible thunder records, returned in
/// thunder order. Throws "insufficient eligible negatives".
std::vector<ingest::ThunderRecord> sample_negatives(std::span<const ingest::ThunderRecord> thunder,
                                                    const TimedPointIndex& fire_idx,
                                                    std::size_t n,
                                                    const LabelingConfig& cfg,
                                                    std::uint64_t seed);

/// Where quiet anchors may be drawn from: 0.25 degree cells and an inclusive date range.
struct StudyDomain
{
  std::vector<geo::CellId> weather_cells;
  Date first;
  Date last;
};
StudyDomain domain_of(const ingest::WeatherTable& weather, int lookback_days);

struct QuietAnchor
{
  geo::CellId thunder_cell;
  Date date;
};
/// n distinct thunder-grid cell-days in the domain with no thunder during
/// [date - holdover, date] and no ignition during [date, date + holdover] within radius.
std::vector<QuietAnchor> sample_quiet_anchors(const StudyDomain& domain,
                                              const TimedPointIndex& thunder_idx,
                                              const TimedPointIndex& fire_idx,
                                              std::size_t n,
                                              const LabelingConfig& cfg,
                                              std::uint64_t seed);

struct BuildReport
{
  std::size_t fires_in{0};
  std::size_t short_fires{0};
  std::size_t lightning{0};
  std::size_t anthropogenic{0};
  std::size_t positives{0};
  std::size_t negatives{0};
  std::size_t train{0};
  std::size_t test{0};
  std::size_t holdout{0};
  std::vector<std::string> warnings;
};
struct Dataset
{
  std::vector<LabeledSample> samples;
  BuildReport report;
};
/// Balanced dataset with split tags. `domain` is required for the anthropogenic kind.
Dataset build_dataset(std::span<const ingest::WildfireEvent> fires,
                      std::span<const ingest::ThunderRecord> thunder,
                      const LabelingConfig& cfg,
                      DatasetKind kind = DatasetKind::lightning,
                      const StudyDomain* domain = nullptr);

/// Assign split tags in place: holdout year first, then row- or year-level draw.
void assign_splits(std::vector<LabeledSample>& samples, const LabelingConfig& cfg);

std::string write_labeled(std::span<const LabeledSample> samples);
std::vector<LabeledSample> read_labeled(const std::filesystem::path& path);
std::vector<LabeledSample> parse_labeled(const csv::Table& t);
}
