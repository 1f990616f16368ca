#include "lightfire/experiments.h"
#include "lightfire/models.h"
#include "lightfire/util.h"
#include "oracles.h"
#include <gtest/gtest.h>
#include <cmath>
#include <filesystem>

using namespace lightfire;
using namespace lightfire::models;

namespace
{
DesignMatrix xor_design(const std::uint64_t seed, const std::size_t n)
{
  Rng rng(seed);
  DesignMatrix X;
  X.names = {"a", "b", "noise"};
  X.n = n;
  X.d = 3;
  for (std::size_t i = 0; i < n; ++i)
  {
    const double a = rng.uniform(-1, 1);
    const double b = rng.uniform(-1, 1);
    X.x.insert(X.x.end(), {a, b, rng.uniform(-1, 1)});
    const bool y = (a * b > 0) != rng.bernoulli(0.05);
    X.y.push_back(y ? 1 : 0);
  }
  return X;
}

double accuracy(const Model& m, const DesignMatrix& X)
{
  return evaluate(m, X).accuracy;
}

std::vector<double> to_vec(const std::vector<std::uint8_t>& y)
{
  return {y.begin(), y.end()};
}
}

TEST(Design, ValidationErrors)
{
  EXPECT_THROW(make_design({"a"}, {}, {}), std::invalid_argument);
  EXPECT_THROW(make_design({"a", "a"}, {{1, 2}}, {true}), std::invalid_argument);
  EXPECT_THROW(make_design({"a"}, {{NAN}}, {true}), std::invalid_argument);
  EXPECT_THROW(make_design({"a", "b"}, {{1}}, {true}), std::invalid_argument);
  const auto X = make_design({"a", "b"}, {{1, 2}, {3, 4}}, {true, false});
  EXPECT_EQ(X.n, 2u);
  EXPECT_EQ(X.at(1, 0), 3.0);
  EXPECT_EQ(parse_model_kind("forest"), ModelKind::forest);
  EXPECT_THROW(parse_model_kind("svm"), std::invalid_argument);
}

TEST(Logistic, SymmetricDataGivesZeroBias)
{
  Rng rng(1);
  std::vector<std::vector<double>> rows;
  std::vector<bool> y;
  for (int i = 0; i < 100; ++i)
  {
    const double a = rng.normal();
    const double b = rng.normal();
    const bool label = a + 0.5 * b + rng.normal() * 0.5 > 0;
    rows.push_back({a, b});
    y.push_back(label);
    rows.push_back({-a, -b});
    y.push_back(!label);
  }
  const auto X = make_design({"a", "b"}, rows, y);
  const auto m = train_logistic(X);
  EXPECT_NEAR(m.bias, 0.0, 1e-6);
  EXPECT_NEAR(m.predict_proba(std::vector<double>{0.0, 0.0}), 0.5, 1e-6);
}

TEST(Logistic, SeparableOneDimensional)
{
  std::vector<std::vector<double>> rows;
  std::vector<bool> y;
  for (int i = 0; i < 40; ++i)
  {
    rows.push_back({i < 20 ? -1.0 - i * 0.1 : 1.0 + i * 0.1});
    y.push_back(i >= 20);
  }
  const auto X = make_design({"x"}, rows, y);
  const auto m = train(ModelKind::logreg, X, {});
  EXPECT_EQ(accuracy(m, X), 1.0);
}

TEST(Logistic, ConvergesAndRejectsSingleClass)
{
  const auto X = oracle::random_design(3, 300, 4);
  const auto m = train_logistic(X);
  EXPECT_LT(m.iterations, 5000);
  const LogisticObjective obj(X, 1e-4);
  std::vector<double> theta(m.weights);
  theta.push_back(m.bias);
  const auto g = obj.gradient(theta);
  double norm = 0;
  for (const double v : g)
  {
    norm += v * v;
  }
  EXPECT_LT(std::sqrt(norm), 1e-6);
  auto one = X;
  std::fill(one.y.begin(), one.y.end(), 1);
  EXPECT_THROW(train_logistic(one), std::invalid_argument);
}

TEST(Logistic, GradientMatchesCentralDifferences)
{
  Rng rng(4);
  const auto X = oracle::random_design(4, 200, 5);
  const LogisticObjective obj(X, 0.01);
  for (int p = 0; p < 100; ++p)
  {
    std::vector<double> theta(obj.dimension());
    for (auto& t : theta)
    {
      t = rng.uniform(-2, 2);
    }
    const auto g = obj.gradient(theta);
    for (std::size_t j = 0; j < theta.size(); ++j)
    {
      const double h = 1e-5 * std::max(1.0, std::abs(theta[j]));
      auto a = theta;
      auto b = theta;
      a[j] += h;
      b[j] -= h;
      const double fd = (obj.value(a) - obj.value(b)) / (2 * h);
      ASSERT_LE(std::abs(fd - g[j]), 1e-4 * std::max(std::abs(fd), 1e-3)) << p << "," << j;
    }
  }
}

TEST(Tree, PureLabelsGiveSingleLeaf)
{
  auto X = oracle::random_design(5, 30, 3);
  std::fill(X.y.begin(), X.y.end(), 0);
  const auto t = train_tree(X);
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].value, 0.0);
}

TEST(Tree, FirstSplitEqualsExhaustiveGini)
{
  for (std::uint64_t s = 0; s < 30; ++s)
  {
    const std::size_t n = 10 + s;
    const std::size_t d = 1 + s % 5;
    const auto X = oracle::random_design(100 + s, n, d);
    const auto t = train_tree(X, TreeConfig{1, 1.0, 0, 0});
    const auto want = oracle::best_gini_split(X.x, X.y, d);
    ASSERT_EQ(t.nodes[0].feature, want.feature) << s;
    if (want.feature >= 0)
    {
      EXPECT_EQ(t.nodes[0].threshold, want.threshold) << s;
    }
  }
}

TEST(Tree, IntegerFeaturesAndMinLeafMatchOracle)
{
  Rng rng(6);
  for (int s = 0; s < 20; ++s)
  {
    DesignMatrix X;
    X.n = 40;
    X.d = 4;
    X.names = {"a", "b", "c", "d"};
    for (std::size_t i = 0; i < X.n; ++i)
    {
      for (int j = 0; j < 4; ++j)
      {
        X.x.push_back(static_cast<double>(rng.index(5)));
      }
      X.y.push_back(rng.bernoulli(0.2 + 0.15 * X.x[i * 4]) ? 1 : 0);
    }
    const double min_leaf = 1.0 + s % 4 * 3.0;
    const auto t = train_tree(X, TreeConfig{1, min_leaf, 0, 0});
    const auto want = oracle::best_gini_split(X.x, X.y, 4, min_leaf);
    ASSERT_EQ(t.nodes[0].feature, want.feature) << s;
    if (want.feature >= 0)
    {
      EXPECT_EQ(t.nodes[0].threshold, want.threshold) << s;
    }
  }
}

TEST(Tree, DuplicateColumnsPickLowerIndex)
{
  auto X = oracle::random_design(7, 50, 1);
  DesignMatrix D;
  D.names = {"copy0", "copy1"};
  D.n = X.n;
  D.d = 2;
  D.y = X.y;
  for (std::size_t i = 0; i < X.n; ++i)
  {
    D.x.insert(D.x.end(), {X.x[i], X.x[i]});
  }
  const auto t = train_tree(D);
  ASSERT_GT(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].feature, 0);
}

TEST(Tree, DepthBoundAndLeafProbabilities)
{
  const auto X = oracle::random_design(8, 400, 5);
  for (const int depth : {1, 3, 6})
  {
    const auto t = train_tree(X, TreeConfig{depth, 1.0, 0, 0});
    EXPECT_LE(t.depth(), depth);
    for (const auto& n : t.nodes)
    {
      EXPECT_TRUE(std::isfinite(n.threshold));
      if (n.feature < 0)
      {
        EXPECT_GE(n.value, 0.0);
        EXPECT_LE(n.value, 1.0);
      }
    }
  }
}

TEST(Tree, IntegerWeightsEqualRowDuplication)
{
  const auto X = oracle::random_design(9, 60, 3);
  Rng rng(9);
  std::vector<double> w(X.n);
  DesignMatrix dup;
  dup.names = X.names;
  dup.d = X.d;
  for (std::size_t i = 0; i < X.n; ++i)
  {
    w[i] = static_cast<double>(rng.index(3));
    for (int k = 0; k < static_cast<int>(w[i]); ++k)
    {
      dup.x.insert(dup.x.end(), X.row(i).begin(), X.row(i).end());
      dup.y.push_back(X.y[i]);
    }
  }
  dup.n = dup.y.size();
  const auto a = train_tree(X, TreeConfig{4, 1.0, 0, 0}, w);
  const auto b = train_tree(dup, TreeConfig{4, 1.0, 0, 0});
  ASSERT_EQ(a.nodes.size(), b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
  {
    EXPECT_EQ(a.nodes[i].feature, b.nodes[i].feature);
    EXPECT_EQ(a.nodes[i].threshold, b.nodes[i].threshold);
    EXPECT_DOUBLE_EQ(a.nodes[i].value, b.nodes[i].value);
  }
}

TEST(Forest, OneTreeNoBootstrapEqualsTree)
{
  const auto X = oracle::random_design(10, 200, 4);
  const auto f = train_forest(X, ForestConfig{1, 5, 1.0, false, 4, 1});
  const auto t = train_tree(X, TreeConfig{5, 1.0, 0, 0});
  ASSERT_EQ(f.trees[0].nodes.size(), t.nodes.size());
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
  {
    EXPECT_EQ(f.trees[0].nodes[i].feature, t.nodes[i].feature);
    EXPECT_EQ(f.trees[0].nodes[i].threshold, t.nodes[i].threshold);
    EXPECT_EQ(f.trees[0].nodes[i].value, t.nodes[i].value);
  }
}

TEST(Forest, SeedDeterminesForestAcrossWorkerCounts)
{
  const auto X = oracle::random_design(11, 300, 6);
  ForestConfig cfg;
  cfg.trees = 20;
  cfg.seed = 5;
  set_workers(1);
  const Model a{ModelKind::forest, X.names, train_forest(X, cfg)};
  set_workers(4);
  const Model b{ModelKind::forest, X.names, train_forest(X, cfg)};
  set_workers(1);
  EXPECT_EQ(model_to_json(a), model_to_json(b));
  cfg.seed = 6;
  const Model c{ModelKind::forest, X.names, train_forest(X, cfg)};
  EXPECT_NE(model_to_json(a), model_to_json(c));
}

TEST(Forest, BeatsLogisticOnInteraction)
{
  const auto train_x = xor_design(12, 800);
  const auto test_x = xor_design(13, 800);
  TrainConfig cfg;
  cfg.forest.trees = 50;
  const auto f = train(ModelKind::forest, train_x, cfg);
  const auto l = train(ModelKind::logreg, train_x, cfg);
  const double fa = accuracy(f, test_x);
  const double la = accuracy(l, test_x);
  EXPECT_GT(fa, la + 0.2) << fa << " vs " << la;
}

TEST(Boosted, ZeroRoundsPredictsPrior)
{
  const auto X = oracle::random_design(14, 100, 3);
  BoostConfig cfg;
  cfg.rounds = 0;
  const auto e = train_boosted(X, cfg);
  double prior = 0;
  for (const auto v : X.y)
  {
    prior += v;
  }
  prior /= static_cast<double>(X.n);
  for (std::size_t i = 0; i < X.n; ++i)
  {
    EXPECT_NEAR(e.predict_proba(X.row(i)), prior, 1e-12);
  }
  EXPECT_EQ(e.loss_history.size(), 1u);
}

TEST(Boosted, TrainingLossNonIncreasing)
{
  for (std::uint64_t s = 0; s < 10; ++s)
  {
    const auto X = oracle::random_design(200 + s, 50 + 20 * s, 1 + s % 5);
    BoostConfig cfg;
    cfg.rounds = 50;
    cfg.learning_rate = s % 2 ? 0.3 : 1.0;
    const auto e = train_boosted(X, cfg);
    ASSERT_EQ(e.loss_history.size(), 51u);
    for (std::size_t r = 1; r < e.loss_history.size(); ++r)
    {
      ASSERT_LE(e.loss_history[r], e.loss_history[r - 1]) << s << " round " << r;
    }
    std::vector<double> p(X.n);
    for (std::size_t i = 0; i < X.n; ++i)
    {
      p[i] = e.predict_proba(X.row(i));
    }
    EXPECT_NEAR(log_loss(p, X.y), e.loss_history.back(), 1e-9);
  }
}

TEST(Boosted, FirstTreeEqualsExhaustiveSecondOrderGain)
{
  int split_roots = 0;
  for (std::uint64_t s = 0; s < 20; ++s)
  {
    const auto X = oracle::random_design(300 + s, 30, 1 + s % 5);
    BoostConfig cfg;
    cfg.rounds = 1;
    cfg.learning_rate = 1.0;
    cfg.min_child_weight = 0.5;
    const auto e = train_boosted(X, cfg);
    double prior = 0;
    for (const auto v : X.y)
    {
      prior += v;
    }
    prior /= static_cast<double>(X.n);
    std::vector<double> g(X.n);
    std::vector<double> h(X.n);
    for (std::size_t i = 0; i < X.n; ++i)
    {
      g[i] = prior - X.y[i];
      h[i] = prior * (1 - prior);
    }
    const auto want = oracle::best_second_order_split(X.x, g, h, X.d, cfg.lambda, cfg.gamma, cfg.min_child_weight);
    const auto& root = e.trees[0].nodes[0];
    ASSERT_EQ(root.feature >= 0, want.feature >= 0) << s;
    if (want.feature < 0)
    {
      continue;
    }
    const double got = oracle::second_order_gain_at(X.x, g, h, X.d, root.feature, root.threshold, cfg.lambda);
    EXPECT_NEAR(got, want.gain, 1e-9 * want.gain) << s;
    if (!want.near_tie())
    {
      EXPECT_EQ(root.feature, want.feature) << s;
      EXPECT_EQ(root.threshold, want.threshold) << s;
    }
    ++split_roots;
  }
  EXPECT_GT(split_roots, 10);
}

TEST(Boosted, LeafWeightsFollowNewtonStep)
{
  const auto X = oracle::random_design(15, 80, 2);
  std::vector<double> g(X.n);
  std::vector<double> h(X.n);
  Rng rng(15);
  for (std::size_t i = 0; i < X.n; ++i)
  {
    g[i] = rng.uniform(-1, 1);
    h[i] = rng.uniform(0.05, 0.25);
  }
  BoostConfig cfg;
  cfg.max_depth = 2;
  cfg.lambda = 2.0;
  cfg.min_child_weight = 0.0;
  const auto t = fit_gradient_tree(X, g, h, cfg);
  std::map<const TreeNode*, std::pair<double, double>> sums;
  for (std::size_t i = 0; i < X.n; ++i)
  {
    std::size_t k = 0;
    while (t.nodes[k].feature >= 0)
    {
      k = static_cast<std::size_t>(X.at(i, static_cast<std::size_t>(t.nodes[k].feature)) <= t.nodes[k].threshold
                                     ? t.nodes[k].left
                                     : t.nodes[k].right);
    }
    sums[&t.nodes[k]].first += g[i];
    sums[&t.nodes[k]].second += h[i];
  }
  for (const auto& [node, gh] : sums)
  {
    EXPECT_NEAR(node->value, -gh.first / (gh.second + 2.0), 1e-12);
  }
}

TEST(Metrics, HandEvaluatedConfusion)
{
  const auto r = metrics_from_confusion({3, 1, 2, 4});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(r.precision, 0.75);
  EXPECT_DOUBLE_EQ(r.recall, 0.6);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
  const auto z = metrics_from_confusion({0, 0, 5, 5});
  EXPECT_EQ(z.precision, 0.0);
  EXPECT_EQ(z.f1, 0.0);
}

TEST(Metrics, AucExamples)
{
  const std::vector<std::uint8_t> y{0, 0, 1, 1, 0, 1};
  EXPECT_EQ(*roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9, 0.3, 0.7}, y), 1.0);
  EXPECT_EQ(*roc_auc(std::vector<double>(6, 0.4), y), 0.5);
  EXPECT_EQ(*roc_auc(std::vector<double>{0.9, 0.8, 0.1, 0.2, 0.7, 0.3}, y), 0.0);
  EXPECT_FALSE(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<std::uint8_t>{1, 1}).has_value());
  const auto r = evaluate(std::vector<double>{0.6, 0.7}, std::vector<std::uint8_t>{1, 1});
  EXPECT_FALSE(r.roc_auc.has_value());
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(Metrics, AucMatchesPairCountingAndMonotoneInvariance)
{
  Rng rng(16);
  for (int s = 0; s < 50; ++s)
  {
    const std::size_t n = 5 + rng.index(60);
    std::vector<double> score(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      score[i] = static_cast<double>(rng.index(8)) / 8.0;
      y[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    y[0] = 1;
    y[1] = 0;
    double wins = 0;
    double pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
      for (std::size_t j = 0; j < n; ++j)
      {
        if (y[i] == 1 && y[j] == 0)
        {
          pairs += 1;
          wins += score[i] > score[j] ? 1.0 : (score[i] == score[j] ? 0.5 : 0.0);
        }
      }
    }
    const auto auc = *roc_auc(score, y);
    EXPECT_NEAR(auc, wins / pairs, 1e-12);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      t[i] = std::exp(3 * score[i]) - 7;
    }
    EXPECT_EQ(*roc_auc(t, y), auc);
    const auto r = evaluate(score, y);
    const auto& c = r.confusion;
    EXPECT_EQ(c.tp + c.fp + c.fn + c.tn, n);
    EXPECT_EQ(r.accuracy, static_cast<double>(c.tp + c.tn) / static_cast<double>(n));
    if (r.precision + r.recall > 0)
    {
      EXPECT_NEAR(r.f1, 2 * r.precision * r.recall / (r.precision + r.recall), 1e-15);
    }
  }
}

TEST(Metrics, ThresholdIsInclusive)
{
  const auto r = evaluate(std::vector<double>{0.5, 0.49999}, std::vector<std::uint8_t>{1, 0});
  EXPECT_EQ(r.confusion.tp, 1u);
  EXPECT_EQ(r.confusion.tn, 1u);
}

TEST(Serialization, RoundTripsEveryKind)
{
  const auto X = oracle::random_design(17, 150, 3);
  TrainConfig cfg;
  cfg.forest.trees = 5;
  cfg.boosted.rounds = 10;
  const auto dir = std::filesystem::temp_directory_path() / "lightfire_test_models";
  std::filesystem::create_directories(dir);
  for (const auto kind : {ModelKind::logreg, ModelKind::forest, ModelKind::boosted})
  {
    const auto m = train(kind, X, cfg);
    const auto path = dir / (std::string(model_kind_name(kind)) + ".json");
    save_model(m, path);
    const auto back = load_model(path);
    EXPECT_EQ(back.kind, kind);
    EXPECT_EQ(model_to_json(back), model_to_json(m));
    EXPECT_EQ(back.predict_all(X), m.predict_all(X));
  }
  EXPECT_THROW(model_from_json(R"({"format":"other","version":1})"), std::runtime_error);
  EXPECT_THROW(model_from_json(R"({"format":"lightfire-model","version":99})"), std::runtime_error);
  try
  {
    load_model(dir / "absent.json");
    FAIL();
  }
  catch (const std::runtime_error& e)
  {
    EXPECT_EQ(std::string(e.what()).rfind("model file not found: ", 0), 0u);
  }
  std::filesystem::remove_all(dir);
}

TEST(Serialization, PredictChecksColumns)
{
  const auto X = oracle::random_design(18, 50, 3);
  const auto m = train(ModelKind::logreg, X, {});
  EXPECT_THROW((void)m.predict_proba(std::vector<double>{1.0}), std::invalid_argument);
  auto Y = X;
  Y.names[0] = "other";
  EXPECT_THROW((void)m.predict_all(Y), std::invalid_argument);
}

namespace
{
// Feature table with one planted signal column among noise.
features::FeatureTable planted_table(const std::uint64_t seed, const std::size_t n, const double shift)
{
  Rng rng(seed);
  features::FeatureTable t;
  t.names = features::column_names(features::FeatureSetConfig::model(5));
  for (std::size_t i = 0; i < n; ++i)
  {
    features::FeatureRow r;
    r.label = i % 2 == 0;
    for (std::size_t j = 0; j < t.names.size(); ++j)
    {
      r.values.push_back(rng.normal());
    }
    // ffmc carries the signal; columns outside Model 1 are pure noise
    r.values[18] = *r.values[18] + (r.label ? 1.5 : -1.5);
    r.values[0] = *r.values[0] + shift + (r.label ? 0.4 : -0.4);
    r.split = rng.bernoulli(0.25) ? labeler::Split::test : labeler::Split::train;
    t.rows.push_back(r);
  }
  return t;
}
}

TEST(Experiments, DesignFromSelectsSplitsAndColumns)
{
  const auto t = planted_table(20, 100, 0);
  const std::vector<labeler::Split> test{labeler::Split::test};
  const auto X = experiments::design_from(t, {"ffmc", "RH"}, test);
  std::size_t n_test = 0;
  for (const auto& r : t.rows)
  {
    n_test += r.split == labeler::Split::test ? 1 : 0;
  }
  EXPECT_EQ(X.n, n_test);
  EXPECT_EQ(X.d, 2u);
  EXPECT_THROW(experiments::design_from(t, {"nope"}, test), std::invalid_argument);
  auto holed = t;
  for (auto& r : holed.rows)
  {
    r.values[0] = std::nullopt;
  }
  EXPECT_THROW(experiments::design_from(holed, {"RH"}, test), std::invalid_argument);
}

TEST(Experiments, AblationGridShapeAndPlantedGroupHelps)
{
  const auto t = planted_table(21, 1200, 0);
  TrainConfig cfg;
  cfg.forest.trees = 20;
  cfg.boosted.rounds = 60;
  const std::vector<int> sets{1, 3, 5};
  const std::vector<ModelKind> kinds{ModelKind::logreg, ModelKind::boosted};
  const auto rows = experiments::ablation_grid(t, sets, kinds, cfg);
  ASSERT_EQ(rows.size(), sets.size() * kinds.size());
  EXPECT_EQ(rows[0].n_features, 13u);
  EXPECT_EQ(rows.back().n_features, 34u);
  const auto boosted_acc = [&](const int set) {
    for (const auto& r : rows)
    {
      if (r.feature_set == set && r.kind == ModelKind::boosted)
      {
        return r.test.accuracy;
      }
    }
    return -1.0;
  };
  EXPECT_GT(boosted_acc(3), boosted_acc(1) + 0.05);
  const auto csv_text = experiments::write_ablation(rows);
  EXPECT_EQ(csv_text.substr(0, csv_text.find('\n')),
            "feature_set,model,n_features,roc_auc,accuracy,f1,precision,recall,tp,fp,fn,tn");
  EXPECT_NE(csv_text.find("Model 3,boosted,19,"), std::string::npos);
}

TEST(Experiments, FullFeatureBoostedIsGridMaximum)
{
  // signal in ffmc plus a lat/lon interaction that only Model 5 sees
  Rng rng(26);
  features::FeatureTable t;
  t.names = features::column_names(features::FeatureSetConfig::model(5));
  for (std::size_t i = 0; i < 2400; ++i)
  {
    features::FeatureRow r;
    for (std::size_t j = 0; j < t.names.size(); ++j)
    {
      r.values.push_back(rng.normal());
    }
    const double z = 1.2 * *r.values[18] + (*r.values[20] * *r.values[21] > 0 ? 2.0 : -2.0);
    r.label = rng.bernoulli(1.0 / (1.0 + std::exp(-z)));
    r.split = rng.bernoulli(0.25) ? labeler::Split::test : labeler::Split::train;
    t.rows.push_back(r);
  }
  TrainConfig cfg;
  cfg.forest.trees = 40;
  cfg.boosted.rounds = 80;
  cfg.boosted.max_depth = 3;
  const auto rows = experiments::ablation_grid(t, {1, 2, 3, 4, 5},
                                               {ModelKind::logreg, ModelKind::forest, ModelKind::boosted}, cfg);
  ASSERT_EQ(rows.size(), 15u);
  const auto best = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.test.accuracy < b.test.accuracy;
  });
  const auto& m5 = rows.back();
  ASSERT_EQ(m5.feature_set, 5);
  ASSERT_EQ(m5.kind, ModelKind::boosted);
  EXPECT_EQ(m5.test.accuracy, best->test.accuracy) << "best is Model " << best->feature_set << " "
                                                   << model_kind_name(best->kind);
  for (const auto& r : rows)
  {
    if (r.feature_set < 5)
    {
      EXPECT_LT(r.test.accuracy, m5.test.accuracy);
    }
  }
}

TEST(Experiments, PermutationImportanceFindsSignalAndIsSeeded)
{
  const auto t = planted_table(22, 800, 0);
  const std::vector<labeler::Split> train_s{labeler::Split::train};
  const std::vector<labeler::Split> test_s{labeler::Split::test};
  const std::vector<std::string> cols{"RH", "t", "ffmc", "lat"};
  const auto Xtr = experiments::design_from(t, cols, train_s);
  const auto Xte = experiments::design_from(t, cols, test_s);
  TrainConfig cfg;
  cfg.boosted.rounds = 40;
  cfg.boosted.max_depth = 2;
  const auto m = train(ModelKind::boosted, Xtr, cfg);
  const auto a = experiments::permutation_importance(m, Xte, 3, 5);
  const auto b = experiments::permutation_importance(m, Xte, 3, 5);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(std::max_element(a.begin(), a.end()) - a.begin(), 2);
  // a column held constant in training is never split on
  auto Xc = Xtr;
  for (std::size_t i = 0; i < Xc.n; ++i)
  {
    Xc.x[i * Xc.d + 3] = 1.0;
  }
  const auto mc = train(ModelKind::boosted, Xc, cfg);
  const auto d = experiments::permutation_importance(mc, Xte, 4, 3);
  EXPECT_EQ(d[3], 0.0);
  EXPECT_THROW(experiments::permutation_importance(m, Xte, 1, 0), std::invalid_argument);
  const auto text = experiments::write_importance(cols, a);
  EXPECT_EQ(text.substr(0, text.find('\n')), "rank,feature,mean_accuracy_drop");
  EXPECT_NE(text.find("1,ffmc,"), std::string::npos);
}

TEST(Experiments, CrossTypeShapeAndShift)
{
  const auto light = planted_table(23, 1000, 0.0);
  auto anthro = planted_table(24, 1000, 0.0);
  // the other dataset has its signal in a different column
  for (auto& r : anthro.rows)
  {
    r.values[18] = *r.values[18] - (r.label ? 1.5 : -1.5);
    r.values[12] = *r.values[12] + (r.label ? 1.5 : -1.5);
  }
  TrainConfig cfg;
  cfg.boosted.rounds = 40;
  const auto cells = experiments::cross_type(light, anthro, ModelKind::boosted, cfg, {1, 5});
  ASSERT_EQ(cells.size(), 8u);
  std::map<std::tuple<int, std::string, std::string>, double> acc;
  for (const auto& c : cells)
  {
    acc[{c.feature_set, c.train_on, c.test_on}] = c.accuracy;
  }
  EXPECT_EQ(acc.size(), 8u);
  for (const int set : {1, 5})
  {
    EXPECT_GT((acc[{set, "lightning", "lightning"}]), (acc[{set, "anthropogenic", "lightning"}]));
    EXPECT_GT((acc[{set, "anthropogenic", "anthropogenic"}]), (acc[{set, "lightning", "anthropogenic"}]));
  }
  // no-shift control: identical distributions give similar accuracy off the diagonal
  const auto twin = planted_table(25, 1000, 0.0);
  const auto same = experiments::cross_type(light, twin, ModelKind::boosted, cfg, {5});
  ASSERT_EQ(same.size(), 4u);
  for (const auto& c : same)
  {
    EXPECT_GT(c.accuracy, 0.8) << c.train_on << "->" << c.test_on;
  }
  EXPECT_NEAR(same[0].accuracy, same[1].accuracy, 0.06);
}
