#pragma once
#include "lightfire/features.h"
#include "lightfire/models.h"
#include <string>
#include <vector>

namespace lightfire::experiments
{
/// Rows of `table` whose split is listed, restricted to `columns` in that order.
/// Throws on an unknown column or an empty entry.
models::DesignMatrix design_from(const features::FeatureTable& table,
                                 const std::vector<std::string>& columns,
                                 std::span<const labeler::Split> splits);

/// Mean accuracy drop per feature when that column is shuffled, over `repeats` shuffles.
std::vector<double> permutation_importance(const models::Model& model,
                                           const models::DesignMatrix& X,
                                           std::uint64_t seed,
                                           int repeats);
std::string write_importance(const std::vector<std::string>& names, const std::vector<double>& drops);

struct AblationRow
{
  int feature_set{5};
  models::ModelKind kind{models::ModelKind::boosted};
  std::size_t n_features{0};
  models::MetricsReport test;
};
/// Train on the train split and score the test split for every (feature set, model kind).
std::vector<AblationRow> ablation_grid(const features::FeatureTable& table,
                                       const std::vector<int>& feature_sets,
                                       const std::vector<models::ModelKind>& kinds,
                                       const models::TrainConfig& cfg);
std::string write_ablation(const std::vector<AblationRow>& rows);

struct CrossTypeCell
{
  int feature_set{1};
  std::string train_on;
  std::string test_on;
  double accuracy{0.0};
  std::size_t n_test{0};
};
/// 2x2 accuracy table per feature set: train on each dataset's train split, test on both test splits.
std::vector<CrossTypeCell> cross_type(const features::FeatureTable& lightning,
                                      const features::FeatureTable& anthropogenic,
                                      models::ModelKind kind,
                                      const models::TrainConfig& cfg,
                                      const std::vector<int>& feature_sets = {1, 5});
std::string write_cross_type(const std::vector<CrossTypeCell>& cells);

std::string metrics_to_json(const std::vector<std::pair<std::string, models::MetricsReport>>& named);
}
