#pragma once
#include "lightfire/climate.h"
#include "lightfire/ingest.h"
#include "lightfire/labeler.h"
#include "lightfire/models.h"
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lightfire::pipeline
{
struct RunConfig
{
  std::optional<std::uint64_t> seed;
  int workers{1};
  std::filesystem::path out{"out"};
  /// directory holding the input CSVs; defaults to `out`
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::filesystem::path> fires_path;
  std::optional<std::filesystem::path> thunder_path;
  std::optional<std::filesystem::path> weather_path;
  std::optional<std::filesystem::path> static_path;
  std::optional<std::filesystem::path> fwi_path;

  labeler::LabelingConfig labeling;
  int feature_set{5};
  models::ModelKind model{models::ModelKind::boosted};
  models::TrainConfig train;
  ingest::SynthConfig synth;
  int importance_repeats{5};
  int histogram_bins{20};

  std::vector<int> ablation_sets{1, 2, 3, 4, 5};
  std::vector<models::ModelKind> ablation_models{models::ModelKind::logreg, models::ModelKind::forest,
                                                 models::ModelKind::boosted};
  std::vector<int> cross_sets{1, 5};

  double region_deg{2.5};
  std::size_t climate_samples{20000};
  features::WeatherShift delta{-2.0, 2.0, 0.0};
  bool recompute{false};

  [[nodiscard]] std::filesystem::path input(const std::optional<std::filesystem::path>& p, const char* name) const;
  /// Throws with the offending field named.
  void validate() const;
};

/// Parse a JSON run configuration. Unknown fields and type mismatches name the field.
RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

inline constexpr std::array<const char*, 10> STAGES{"synth", "label",  "features", "train",   "eval",
                                                    "ablate", "cross", "trend",    "project", "report"};

/// Run one stage; returns its one-line summary.
std::string run_stage(const std::string& stage, const RunConfig& cfg);
}
