#pragma once
#include "lightfire/fwi.h"
#include "lightfire/ingest.h"
#include "lightfire/labeler.h"
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lightfire::features
{
inline constexpr std::array<const char*, 13> VMA_COLUMNS{
  "RH", "t", "prec", "days_since_prec", "monthly_prec", "v_total", "v_direction", "low_veg", "high_veg", "NDVI", "sm", "water", "pop"};
inline constexpr std::array<const char*, 1> HISTORY_COLUMNS{"historical_fires"};
inline constexpr std::array<const char*, 6> FWI_COLUMNS{"fwi", "bui", "drought", "duff", "ffmc", "isi"};
inline constexpr std::array<const char*, 14> SPATIOTEMPORAL_COLUMNS{"lat",
                                                                    "lon",
                                                                    "month_01",
                                                                    "month_02",
                                                                    "month_03",
                                                                    "month_04",
                                                                    "month_05",
                                                                    "month_06",
                                                                    "month_07",
                                                                    "month_08",
                                                                    "month_09",
                                                                    "month_10",
                                                                    "month_11",
                                                                    "month_12"};

/// Which feature groups enter a model.
struct FeatureSetConfig
{
  bool include_vma{true};
  bool include_history{true};
  bool include_fwi{true};
  bool include_spatiotemporal{true};

  /// Throws unless at least one group is enabled.
  void validate() const;
  /// Model 1 (vegetation/meteorological/anthropogenic only) through Model 5 (all groups).
  static FeatureSetConfig model(int index);
  bool operator==(const FeatureSetConfig&) const = default;
};
std::vector<std::string> column_names(const FeatureSetConfig& cfg);

struct LagOptions
{
  int dry_window_days{90};
  int month_days{30};
  double wet_day_mm{1.0};
};

/// Days back from the last element to the most recent day with at least
/// `wet_day_mm`, capped at `window`. The last element is the anchor day.
/// Throws "insufficient history" when fewer than `window` days are given.
int days_since_prec(std::span<const double> daily_prec, int window = 90, double wet_day_mm = 1.0);
/// Mean of the `days` values immediately preceding the anchor; `prior` excludes the anchor day.
double monthly_prec(std::span<const double> prior, int days = 30);

struct Wind
{
  double speed{0.0};
  /// Bearing the wind blows toward, clockwise from north, in [0, 360).
  double direction_deg{0.0};
  bool calm{false};
};
Wind wind_decompose(double u, double v);

/// Additive weather offsets used for climate-shifted reassembly.
struct WeatherShift
{
  double rh{0.0};
  double t{0.0};
  double prec{0.0};
  [[nodiscard]] bool is_zero() const { return rh == 0.0 && t == 0.0 && prec == 0.0; }
};

struct Tables
{
  const ingest::WeatherTable* weather{nullptr};
  const ingest::StaticTable* statics{nullptr};
  /// optional precomputed indices; preferred when present
  const ingest::FwiTable* fwi{nullptr};
};

struct FeatureRow
{
  std::vector<std::optional<double>> values;
  bool label{false};
  labeler::Split split{labeler::Split::train};
  Date date;
  geo::GeoPoint anchor;
};

/// Builds model rows from labeled anchors by nearest-cell lookup.
class Assembler
{
public:
  struct Options
  {
    LagOptions lags;
    /// per-cell offsets; when set, shifted weather feeds every derived feature
    const std::map<geo::CellId, WeatherShift>* shifts{nullptr};
    /// recompute days_since_prec and monthly_prec from shifted precipitation
    bool shift_lagged{false};
    /// recompute fire weather indices from shifted weather instead of using the table
    bool shift_fwi{false};
  };
  Assembler(const Tables& tables, FeatureSetConfig cfg);
  Assembler(const Tables& tables, FeatureSetConfig cfg, Options options);

  /// Throws "cell not covered" or "date gap". Missing source values become empty entries.
  [[nodiscard]] FeatureRow assemble(const labeler::LabeledSample& sample) const;
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  /// Count of weather values clamped while applying shifts.
  [[nodiscard]] std::size_t clamped() const { return clamped_; }
private:
  struct CellCache
  {
    std::vector<ingest::WeatherDay> weather;
    std::vector<std::optional<fwi::DayIndices>> indices;
  };
  [[nodiscard]] const CellCache* cache(const geo::CellId& c) const;
  Tables tables_;
  FeatureSetConfig cfg_;
  Options options_;
  std::vector<std::string> names_;
  std::map<geo::CellId, CellCache> cache_;
  std::size_t clamped_{0};
};

/// Assemble every sample in parallel; output order equals input order.
std::vector<FeatureRow> assemble_all(const Assembler& assembler, std::span<const labeler::LabeledSample> samples);

/// Drop surplus rows of the larger class (seeded) so both classes have equal counts.
/// Returns the number of rows removed.
std::size_t rebalance(std::vector<FeatureRow>& rows, std::uint64_t seed);

struct FeatureTable
{
  std::vector<std::string> names;
  std::vector<FeatureRow> rows;
};
std::string write_features(const FeatureTable& table);
FeatureTable read_features(const std::filesystem::path& path);
FeatureTable parse_features(const csv::Table& t);

/// Column-major view of a feature table; empty entries are not allowed.
std::vector<std::vector<double>> columns_of(const FeatureTable& table, bool append_label);

struct CorrelationMatrix
{
  std::vector<std::string> names;
  /// row-major n x n; nullopt where a column is constant
  std::vector<std::optional<double>> r;
  [[nodiscard]] const std::optional<double>& at(std::size_t i, std::size_t j) const { return r[i * names.size() + j]; }
};
/// Throws std::invalid_argument for fewer than two rows or mismatched column lengths.
CorrelationMatrix pearson_matrix(std::span<const std::vector<double>> columns, std::vector<std::string> names);
std::string write_correlation(const CorrelationMatrix& m);

struct Histogram
{
  std::string feature;
  /// bins + 1 edges spanning the pooled min and max
  std::vector<double> edges;
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};
std::vector<Histogram> class_histograms(std::span<const std::vector<double>> columns,
                                        std::span<const std::string> names,
                                        std::span<const std::uint8_t> labels,
                                        int bins);
std::string write_histograms(std::span<const Histogram> hists);
}
