#include "lightfire/experiments.h"
#include "lightfire/csv.h"
#include "lightfire/util.h"
#include <nlohmann/json.hpp>
#include <algorithm>
#include <stdexcept>

namespace lightfire::experiments
{
using models::DesignMatrix;
using models::MetricsReport;
using models::ModelKind;

DesignMatrix design_from(const features::FeatureTable& table,
                         const std::vector<std::string>& columns,
                         const std::span<const labeler::Split> splits)
{
  std::vector<std::size_t> pos;
  for (const auto& c : columns)
  {
    const auto it = std::find(table.names.begin(), table.names.end(), c);
    if (it == table.names.end())
    {
      throw std::invalid_argument("feature table has no column " + c);
    }
    pos.push_back(static_cast<std::size_t>(it - table.names.begin()));
  }
  DesignMatrix X;
  X.names = columns;
  X.d = columns.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r)
  {
    const auto& row = table.rows[r];
    if (std::find(splits.begin(), splits.end(), row.split) == splits.end())
    {
      continue;
    }
    for (std::size_t j = 0; j < pos.size(); ++j)
    {
      const auto& v = row.values[pos[j]];
      if (!v)
      {
        throw std::invalid_argument("missing value in column " + columns[j] + " at row " + std::to_string(r + 1));
      }
      X.x.push_back(*v);
    }
    X.y.push_back(row.label ? 1 : 0);
    ++X.n;
  }
  X.validate();
  return X;
}

std::vector<double> permutation_importance(const models::Model& model,
                                           const DesignMatrix& X,
                                           const std::uint64_t seed,
                                           const int repeats)
{
  if (repeats < 1)
  {
    throw std::invalid_argument("permutation_importance: repeats must be >= 1");
  }
  const double base = models::evaluate(model, X).accuracy;
  std::vector<double> drops(X.d, 0.0);
  parallel_for(X.d, [&](const std::size_t j) {
    DesignMatrix Xp = X;
    std::vector<double> col(X.n);
    double total = 0.0;
    for (int r = 0; r < repeats; ++r)
    {
      Rng rng(derive_seed(derive_seed(seed, j), static_cast<std::uint64_t>(r)));
      for (std::size_t i = 0; i < X.n; ++i)
      {
        col[i] = X.at(i, j);
      }
      rng.shuffle(col);
      for (std::size_t i = 0; i < X.n; ++i)
      {
        Xp.x[i * X.d + j] = col[i];
      }
      std::vector<double> p(X.n);
      for (std::size_t i = 0; i < X.n; ++i)
      {
        p[i] = model.predict_proba(Xp.row(i));
      }
      total += base - models::evaluate(p, Xp.y).accuracy;
    }
    drops[j] = total / repeats;
  });
  return drops;
}

std::string write_importance(const std::vector<std::string>& names, const std::vector<double>& drops)
{
  std::vector<std::size_t> order(names.size());
  for (std::size_t i = 0; i < order.size(); ++i)
  {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::size_t a, const std::size_t b) {
    return drops[a] > drops[b];
  });
  csv::Writer w({"rank", "feature", "mean_accuracy_drop"});
  long rank = 1;
  for (const auto i : order)
  {
    w.field(rank++).field(names[i]).field(drops[i]);
    w.end_row();
  }
  return w.str();
}

std::vector<AblationRow> ablation_grid(const features::FeatureTable& table,
                                       const std::vector<int>& feature_sets,
                                       const std::vector<ModelKind>& kinds,
                                       const models::TrainConfig& cfg)
{
  const std::array train_split{labeler::Split::train};
  const std::array test_split{labeler::Split::test};
  std::vector<AblationRow> out;
  for (const int fs : feature_sets)
  {
    const auto cols = features::column_names(features::FeatureSetConfig::model(fs));
    const auto Xtr = design_from(table, cols, train_split);
    const auto Xte = design_from(table, cols, test_split);
    for (const auto k : kinds)
    {
      const auto m = models::train(k, Xtr, cfg);
      out.push_back(AblationRow{fs, k, cols.size(), models::evaluate(m, Xte)});
    }
  }
  return out;
}

std::string write_ablation(const std::vector<AblationRow>& rows)
{
  csv::Writer w({"feature_set", "model", "n_features", "roc_auc", "accuracy", "f1", "precision", "recall", "tp", "fp",
                 "fn", "tn"});
  for (const auto& r : rows)
  {
    const auto& m = r.test;
    w.field("Model " + std::to_string(r.feature_set))
      .field(models::model_kind_name(r.kind))
      .field(static_cast<long>(r.n_features))
      .field(m.roc_auc)
      .field(m.accuracy)
      .field(m.f1)
      .field(m.precision)
      .field(m.recall)
      .field(static_cast<long>(m.confusion.tp))
      .field(static_cast<long>(m.confusion.fp))
      .field(static_cast<long>(m.confusion.fn))
      .field(static_cast<long>(m.confusion.tn));
    w.end_row();
  }
  return w.str();
}

std::vector<CrossTypeCell> cross_type(const features::FeatureTable& lightning,
                                      const features::FeatureTable& anthropogenic,
                                      const ModelKind kind,
                                      const models::TrainConfig& cfg,
                                      const std::vector<int>& feature_sets)
{
  const std::array train_split{labeler::Split::train};
  const std::array test_split{labeler::Split::test};
  const std::array<std::pair<const char*, const features::FeatureTable*>, 2> sets{
    {{"lightning", &lightning}, {"anthropogenic", &anthropogenic}}};
  std::vector<CrossTypeCell> out;
  for (const int fs : feature_sets)
  {
    const auto cols = features::column_names(features::FeatureSetConfig::model(fs));
    for (const auto& [train_name, train_table] : sets)
    {
      const auto m = models::train(kind, design_from(*train_table, cols, train_split), cfg);
      for (const auto& [test_name, test_table] : sets)
      {
        const auto Xte = design_from(*test_table, cols, test_split);
        out.push_back(CrossTypeCell{fs, train_name, test_name, models::evaluate(m, Xte).accuracy, Xte.n});
      }
    }
  }
  return out;
}

std::string write_cross_type(const std::vector<CrossTypeCell>& cells)
{
  csv::Writer w({"feature_set", "train_on", "test_on", "accuracy", "n_test"});
  for (const auto& c : cells)
  {
    w.field("Model " + std::to_string(c.feature_set))
      .field(c.train_on)
      .field(c.test_on)
      .field(c.accuracy)
      .field(static_cast<long>(c.n_test));
    w.end_row();
  }
  return w.str();
}

std::string metrics_to_json(const std::vector<std::pair<std::string, MetricsReport>>& named)
{
  nlohmann::ordered_json j;
  for (const auto& [name, m] : named)
  {
    auto& e = j[name];
    e["n"] = m.n;
    e["roc_auc"] = m.roc_auc ? nlohmann::ordered_json(*m.roc_auc) : nlohmann::ordered_json();
    e["roc_auc_defined"] = m.roc_auc.has_value();
    e["accuracy"] = m.accuracy;
    e["f1"] = m.f1;
    e["precision"] = m.precision;
    e["recall"] = m.recall;
    e["confusion"] = {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}};
  }
  return j.dump(2) + "\n";
}
}
