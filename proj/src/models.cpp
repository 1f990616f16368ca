#include "lightfire/models.h"
#include "lightfire/util.h"
#include <nlohmann/json.hpp>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace lightfire::models
{
namespace
{
// splits must improve the criterion by more than this
constexpr double MIN_GAIN = 1e-12;

double softplus(const double m)
{
  return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

struct GiniCriterion
{
  struct Acc
  {
    double w{0.0};
    double w1{0.0};
    void add(const Acc& o)
    {
      w += o.w;
      w1 += o.w1;
    }
    [[nodiscard]] Acc minus(const Acc& o) const { return {w - o.w, w1 - o.w1}; }
  };
  double min_leaf;
  static double impurity(const Acc& a)
  {
    const double p = a.w1 / a.w;
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
  }
  [[nodiscard]] bool admissible(const Acc& l, const Acc& r) const { return l.w >= min_leaf && r.w >= min_leaf; }
  [[nodiscard]] double gain(const Acc& p, const Acc& l, const Acc& r) const
  {
    return impurity(p) - (l.w / p.w) * impurity(l) - (r.w / p.w) * impurity(r);
  }
  [[nodiscard]] double leaf(const Acc& a) const { return a.w1 / a.w; }
  [[nodiscard]] bool terminal(const Acc& a) const { return a.w1 == 0.0 || a.w1 == a.w; }
};

struct SecondOrderCriterion
{
  struct Acc
  {
    double g{0.0};
    double h{0.0};
    void add(const Acc& o)
    {
      g += o.g;
      h += o.h;
    }
    [[nodiscard]] Acc minus(const Acc& o) const { return {g - o.g, h - o.h}; }
  };
  double lambda;
  double gamma;
  double min_child_weight;
  [[nodiscard]] bool admissible(const Acc& l, const Acc& r) const
  {
    return l.h >= min_child_weight && r.h >= min_child_weight;
  }
  [[nodiscard]] double score(const Acc& a) const { return a.g * a.g / (a.h + lambda); }
  [[nodiscard]] double gain(const Acc& p, const Acc& l, const Acc& r) const
  {
    return 0.5 * (score(l) + score(r) - score(p)) - gamma;
  }
  [[nodiscard]] double leaf(const Acc& a) const { return -a.g / (a.h + lambda); }
  [[nodiscard]] bool terminal(const Acc&) const { return false; }
};

/// Exact greedy depth-first tree growth over presorted column orders.
template <class Crit>
class Grower
{
public:
  using Acc = typename Crit::Acc;
  Grower(const DesignMatrix& X,
         std::vector<Acc> stats,
         std::vector<std::uint32_t> rows,
         Crit crit,
         const int max_depth,
         const std::size_t max_features,
         const std::uint64_t seed)
    : X_(X), stats_(std::move(stats)), crit_(crit), max_depth_(max_depth), max_features_(max_features), rng_(seed)
  {
    std::vector<std::vector<std::uint32_t>> orders(X.d, rows);
    for (std::size_t f = 0; f < X.d; ++f)
    {
      std::stable_sort(orders[f].begin(), orders[f].end(), [&](const std::uint32_t a, const std::uint32_t b) {
        return X_.at(a, f) < X_.at(b, f);
      });
    }
    tree_.max_depth = max_depth;
    build(std::move(orders), rows, 0);
  }
  DecisionTree take() { return std::move(tree_); }
private:
  int build(std::vector<std::vector<std::uint32_t>> orders, const std::vector<std::uint32_t>& rows, const int depth)
  {
    Acc parent;
    for (const auto r : rows)
    {
      parent.add(stats_[r]);
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{-1, 0.0, -1, -1, crit_.leaf(parent)});
    if (depth >= max_depth_ || rows.size() < 2 || crit_.terminal(parent) || X_.d == 0)
    {
      return id;
    }
    std::vector<std::size_t> candidates(X_.d);
    std::iota(candidates.begin(), candidates.end(), 0);
    if (max_features_ > 0 && max_features_ < X_.d)
    {
      candidates = sample_without_replacement(X_.d, max_features_, rng_);
      std::sort(candidates.begin(), candidates.end());
    }
    int best_f = -1;
    double best_thr = 0.0;
    double best_gain = MIN_GAIN;
    for (const auto f : candidates)
    {
      const auto& ord = orders[f];
      Acc left;
      for (std::size_t k = 0; k + 1 < ord.size(); ++k)
      {
        left.add(stats_[ord[k]]);
        const double a = X_.at(ord[k], f);
        const double b = X_.at(ord[k + 1], f);
        if (!(a < b))
        {
          continue;
        }
        const Acc right = parent.minus(left);
        if (!crit_.admissible(left, right))
        {
          continue;
        }
        const double g = crit_.gain(parent, left, right);
        if (g > best_gain)
        {
          best_gain = g;
          best_f = static_cast<int>(f);
          double mid = 0.5 * (a + b);
          if (!(mid < b))
          {
            mid = a;
          }
          best_thr = mid;
        }
      }
    }
    if (best_f < 0)
    {
      return id;
    }
    const auto bf = static_cast<std::size_t>(best_f);
    std::vector<std::vector<std::uint32_t>> lo(X_.d);
    std::vector<std::vector<std::uint32_t>> hi(X_.d);
    for (std::size_t f = 0; f < X_.d; ++f)
    {
      for (const auto r : orders[f])
      {
        (X_.at(r, bf) <= best_thr ? lo[f] : hi[f]).push_back(r);
      }
    }
    orders.clear();
    std::vector<std::uint32_t> lo_rows;
    std::vector<std::uint32_t> hi_rows;
    for (const auto r : rows)
    {
      (X_.at(r, bf) <= best_thr ? lo_rows : hi_rows).push_back(r);
    }
    const int l = build(std::move(lo), lo_rows, depth + 1);
    const int h = build(std::move(hi), hi_rows, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_f;
    node.threshold = best_thr;
    node.left = l;
    node.right = h;
    return id;
  }

  const DesignMatrix& X_;
  std::vector<Acc> stats_;
  Crit crit_;
  int max_depth_;
  std::size_t max_features_;
  Rng rng_;
  DecisionTree tree_;
};

std::vector<std::uint32_t> all_rows(const std::size_t n)
{
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0U);
  return rows;
}

void require_two_classes(const DesignMatrix& X, const char* what)
{
  const auto pos = std::count(X.y.begin(), X.y.end(), std::uint8_t{1});
  if (pos == 0 || static_cast<std::size_t>(pos) == X.n)
  {
    throw std::invalid_argument(std::string(what) + ": single-class training data");
  }
}

nlohmann::json tree_to_json(const DecisionTree& t)
{
  nlohmann::json j;
  j["max_depth"] = t.max_depth;
  auto& f = j["feature"] = nlohmann::json::array();
  auto& th = j["threshold"] = nlohmann::json::array();
  auto& l = j["left"] = nlohmann::json::array();
  auto& r = j["right"] = nlohmann::json::array();
  auto& v = j["value"] = nlohmann::json::array();
  for (const auto& n : t.nodes)
  {
    f.push_back(n.feature);
    th.push_back(n.threshold);
    l.push_back(n.left);
    r.push_back(n.right);
    v.push_back(n.value);
  }
  return j;
}

DecisionTree tree_from_json(const nlohmann::json& j)
{
  DecisionTree t;
  t.max_depth = j.at("max_depth").get<int>();
  const auto& f = j.at("feature");
  const auto& th = j.at("threshold");
  const auto& l = j.at("left");
  const auto& r = j.at("right");
  const auto& v = j.at("value");
  const auto n = f.size();
  if (th.size() != n || l.size() != n || r.size() != n || v.size() != n)
  {
    throw std::runtime_error("model file: tree arrays differ in length");
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    TreeNode node{f[i].get<int>(), th[i].get<double>(), l[i].get<int>(), r[i].get<int>(), v[i].get<double>()};
    if (node.feature >= 0
        && (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) || node.left >= static_cast<int>(n)
            || node.right >= static_cast<int>(n)))
    {
      throw std::runtime_error("model file: tree child index out of range");
    }
    t.nodes.push_back(node);
  }
  if (t.nodes.empty())
  {
    throw std::runtime_error("model file: empty tree");
  }
  return t;
}
}

void DesignMatrix::validate() const
{
  if (n == 0)
  {
    throw std::invalid_argument("design matrix has no rows");
  }
  if (names.size() != d || x.size() != n * d || y.size() != n)
  {
    throw std::invalid_argument("design matrix shape mismatch");
  }
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size())
  {
    throw std::invalid_argument("design matrix has duplicate feature names");
  }
  for (const double v : x)
  {
    if (!std::isfinite(v))
    {
      throw std::invalid_argument("design matrix has a non-finite entry");
    }
  }
}

DesignMatrix make_design(std::vector<std::string> names,
                         const std::vector<std::vector<double>>& rows,
                         const std::vector<bool>& labels)
{
  DesignMatrix X;
  X.d = names.size();
  X.names = std::move(names);
  X.n = rows.size();
  X.x.reserve(X.n * X.d);
  for (const auto& r : rows)
  {
    if (r.size() != X.d)
    {
      throw std::invalid_argument("design matrix shape mismatch");
    }
    X.x.insert(X.x.end(), r.begin(), r.end());
  }
  for (const bool b : labels)
  {
    X.y.push_back(b ? 1 : 0);
  }
  X.validate();
  return X;
}

const char* model_kind_name(const ModelKind k)
{
  switch (k)
  {
    case ModelKind::logreg:
      return "logreg";
    case ModelKind::forest:
      return "forest";
    case ModelKind::boosted:
      return "boosted";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string_view s)
{
  if (s == "logreg")
  {
    return ModelKind::logreg;
  }
  if (s == "forest")
  {
    return ModelKind::forest;
  }
  if (s == "boosted")
  {
    return ModelKind::boosted;
  }
  throw std::invalid_argument("unknown model kind '" + std::string(s) + "' (expected logreg, forest or boosted)");
}

// ---- logistic regression ----

LogisticObjective::LogisticObjective(const DesignMatrix& X, const double l2)
  : n_(X.n), d_(X.d), l2_(l2), z_(X.x), mean_(X.d, 0.0), sd_(X.d, 1.0)
{
  for (std::size_t j = 0; j < d_; ++j)
  {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
    {
      m += X.at(i, j);
    }
    m /= static_cast<double>(n_);
    double ss = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
    {
      ss += (X.at(i, j) - m) * (X.at(i, j) - m);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n_));
    mean_[j] = m;
    sd_[j] = sd > 0.0 ? sd : 1.0;
    for (std::size_t i = 0; i < n_; ++i)
    {
      z_[i * d_ + j] = (X.at(i, j) - m) / sd_[j];
    }
  }
  y_.reserve(n_);
  for (const auto v : X.y)
  {
    y_.push_back(v);
  }
}

double LogisticObjective::value(const std::span<const double> theta) const
{
  double loss = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
  {
    double m = theta[d_];
    for (std::size_t j = 0; j < d_; ++j)
    {
      m += theta[j] * z_[i * d_ + j];
    }
    loss += softplus(m) - y_[i] * m;
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < d_; ++j)
  {
    reg += theta[j] * theta[j];
  }
  return loss / static_cast<double>(n_) + 0.5 * l2_ * reg;
}

std::vector<double> LogisticObjective::gradient(const std::span<const double> theta) const
{
  std::vector<double> g(d_ + 1, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
  {
    double m = theta[d_];
    for (std::size_t j = 0; j < d_; ++j)
    {
      m += theta[j] * z_[i * d_ + j];
    }
    const double r = sigmoid(m) - y_[i];
    for (std::size_t j = 0; j < d_; ++j)
    {
      g[j] += r * z_[i * d_ + j];
    }
    g[d_] += r;
  }
  for (std::size_t j = 0; j <= d_; ++j)
  {
    g[j] /= static_cast<double>(n_);
  }
  for (std::size_t j = 0; j < d_; ++j)
  {
    g[j] += l2_ * theta[j];
  }
  return g;
}

LogisticModel train_logistic(const DesignMatrix& X, const LogisticConfig& cfg)
{
  X.validate();
  require_two_classes(X, "train_logistic");
  const LogisticObjective obj(X, cfg.l2);
  std::vector<double> theta(obj.dimension(), 0.0);
  double f = obj.value(theta);
  double step = 1.0;
  int it = 0;
  std::vector<double> trial(theta.size());
  for (; it < cfg.max_iterations; ++it)
  {
    const auto g = obj.gradient(theta);
    double gg = 0.0;
    for (const double v : g)
    {
      gg += v * v;
    }
    if (std::sqrt(gg) < cfg.gradient_tolerance)
    {
      break;
    }
    // backtracking with Armijo condition
    bool accepted = false;
    for (int k = 0; k < 60; ++k)
    {
      for (std::size_t j = 0; j < theta.size(); ++j)
      {
        trial[j] = theta[j] - step * g[j];
      }
      const double ft = obj.value(trial);
      if (ft <= f - 0.5 * step * gg)
      {
        theta.swap(trial);
        f = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
    {
      break;
    }
    step = std::min(step * 2.0, 1e6);
  }
  LogisticModel m;
  m.mean = obj.mean();
  m.sd = obj.sd();
  m.weights.assign(theta.begin(), theta.end() - 1);
  m.bias = theta.back();
  m.iterations = it;
  return m;
}

double LogisticModel::predict_proba(const std::span<const double> row) const
{
  double z = bias;
  for (std::size_t j = 0; j < weights.size(); ++j)
  {
    z += weights[j] * (row[j] - mean[j]) / sd[j];
  }
  return sigmoid(z);
}

// ---- trees ----

double DecisionTree::predict(const std::span<const double> row) const
{
  std::size_t i = 0;
  while (nodes[i].feature >= 0)
  {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

int DecisionTree::depth() const
{
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0)
    {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t DecisionTree::leaves() const
{
  return static_cast<std::size_t>(
    std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

DecisionTree train_tree(const DesignMatrix& X, const TreeConfig& cfg, const std::span<const double> weights)
{
  if (X.n == 0)
  {
    throw std::invalid_argument("train_tree: no rows");
  }
  if (!weights.empty() && weights.size() != X.n)
  {
    throw std::invalid_argument("train_tree: weight count differs from row count");
  }
  std::vector<GiniCriterion::Acc> stats(X.n);
  std::vector<std::uint32_t> rows;
  for (std::size_t i = 0; i < X.n; ++i)
  {
    const double w = weights.empty() ? 1.0 : weights[i];
    stats[i] = {w, w * X.y[i]};
    if (w > 0.0)
    {
      rows.push_back(static_cast<std::uint32_t>(i));
    }
  }
  if (rows.empty())
  {
    throw std::invalid_argument("train_tree: all weights are zero");
  }
  Grower<GiniCriterion> g(X, std::move(stats), std::move(rows), GiniCriterion{cfg.min_leaf}, cfg.max_depth,
                          cfg.max_features, cfg.seed);
  return g.take();
}

ForestModel train_forest(const DesignMatrix& X, const ForestConfig& cfg)
{
  X.validate();
  if (cfg.trees < 1)
  {
    throw std::invalid_argument("train_forest: trees must be >= 1");
  }
  ForestModel m;
  m.max_features = cfg.max_features > 0
                   ? cfg.max_features
                   : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(X.d))));
  const auto nt = static_cast<std::size_t>(cfg.trees);
  m.trees.resize(nt);
  m.tree_seeds.resize(nt);
  parallel_for(nt, [&](const std::size_t t) {
    const auto seed = derive_seed(cfg.seed, t);
    m.tree_seeds[t] = seed;
    std::vector<double> w;
    if (cfg.bootstrap)
    {
      Rng rng(seed);
      w.assign(X.n, 0.0);
      for (std::size_t k = 0; k < X.n; ++k)
      {
        w[rng.index(X.n)] += 1.0;
      }
    }
    const TreeConfig tc{cfg.max_depth, cfg.min_leaf, m.max_features, derive_seed(seed, 1)};
    m.trees[t] = train_tree(X, tc, w);
  });
  return m;
}

double ForestModel::predict_proba(const std::span<const double> row) const
{
  double s = 0.0;
  for (const auto& t : trees)
  {
    s += t.predict(row);
  }
  return s / static_cast<double>(trees.size());
}

// ---- boosting ----

DecisionTree fit_gradient_tree(const DesignMatrix& X,
                               const std::span<const double> grad,
                               const std::span<const double> hess,
                               const BoostConfig& cfg)
{
  std::vector<SecondOrderCriterion::Acc> stats(X.n);
  for (std::size_t i = 0; i < X.n; ++i)
  {
    stats[i] = {grad[i], hess[i]};
  }
  Grower<SecondOrderCriterion> g(X, std::move(stats), all_rows(X.n),
                                 SecondOrderCriterion{cfg.lambda, cfg.gamma, cfg.min_child_weight}, cfg.max_depth, 0,
                                 0);
  return g.take();
}

double log_loss(const std::span<const double> prob, const std::span<const std::uint8_t> y)
{
  constexpr double eps = 1e-15;
  double s = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i)
  {
    const double p = std::clamp(prob[i], eps, 1.0 - eps);
    s -= y[i] ? std::log(p) : std::log1p(-p);
  }
  return s / static_cast<double>(prob.size());
}

namespace
{
double margin_loss(const std::vector<double>& m, const std::vector<std::uint8_t>& y)
{
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
  {
    s += softplus(m[i]) - y[i] * m[i];
  }
  return s / static_cast<double>(m.size());
}
}

BoostedEnsemble train_boosted(const DesignMatrix& X, const BoostConfig& cfg)
{
  X.validate();
  if (cfg.rounds < 0)
  {
    throw std::invalid_argument("train_boosted: rounds must be >= 0");
  }
  BoostedEnsemble e;
  e.learning_rate = cfg.learning_rate;
  e.lambda = cfg.lambda;
  const double prior =
    std::clamp(static_cast<double>(std::count(X.y.begin(), X.y.end(), std::uint8_t{1})) / static_cast<double>(X.n),
               1e-6, 1.0 - 1e-6);
  e.base_score = std::log(prior / (1.0 - prior));
  std::vector<double> margin(X.n, e.base_score);
  double loss = margin_loss(margin, X.y);
  e.loss_history.push_back(loss);
  std::vector<double> grad(X.n);
  std::vector<double> hess(X.n);
  std::vector<double> out(X.n);
  std::vector<double> trial(X.n);
  for (int r = 0; r < cfg.rounds; ++r)
  {
    for (std::size_t i = 0; i < X.n; ++i)
    {
      const double p = sigmoid(margin[i]);
      grad[i] = p - X.y[i];
      hess[i] = p * (1.0 - p);
    }
    auto tree = fit_gradient_tree(X, grad, hess, cfg);
    for (std::size_t i = 0; i < X.n; ++i)
    {
      out[i] = tree.predict(X.row(i));
    }
    double scale = cfg.learning_rate;
    double next = loss;
    for (int k = 0;; ++k)
    {
      for (std::size_t i = 0; i < X.n; ++i)
      {
        trial[i] = margin[i] + scale * out[i];
      }
      next = margin_loss(trial, X.y);
      if (next <= loss)
      {
        break;
      }
      if (k == 30)
      {
        scale = 0.0;
        trial = margin;
        next = loss;
        break;
      }
      scale *= 0.5;
    }
    if (scale != cfg.learning_rate)
    {
      ++e.damped_rounds;
    }
    for (auto& n : tree.nodes)
    {
      n.value *= scale;
    }
    margin.swap(trial);
    loss = next;
    e.loss_history.push_back(loss);
    e.trees.push_back(std::move(tree));
  }
  return e;
}

double BoostedEnsemble::margin(const std::span<const double> row) const
{
  double m = base_score;
  for (const auto& t : trees)
  {
    m += t.predict(row);
  }
  return m;
}

double BoostedEnsemble::predict_proba(const std::span<const double> row) const
{
  return sigmoid(margin(row));
}

// ---- generic model ----

double Model::predict_proba(const std::span<const double> row) const
{
  if (row.size() != features.size())
  {
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " values, model expects "
                                + std::to_string(features.size()));
  }
  return std::visit([&](const auto& m) { return m.predict_proba(row); }, fit);
}

std::vector<double> Model::predict_all(const DesignMatrix& X) const
{
  if (X.names != features)
  {
    throw std::invalid_argument("design columns do not match the model's feature list");
  }
  std::vector<double> p(X.n);
  parallel_for(X.n, [&](const std::size_t i) { p[i] = predict_proba(X.row(i)); });
  return p;
}

Model train(const ModelKind kind, const DesignMatrix& X, const TrainConfig& cfg)
{
  Model m;
  m.kind = kind;
  m.features = X.names;
  switch (kind)
  {
    case ModelKind::logreg:
      m.fit = train_logistic(X, cfg.logistic);
      break;
    case ModelKind::forest:
      m.fit = train_forest(X, cfg.forest);
      break;
    case ModelKind::boosted:
      m.fit = train_boosted(X, cfg.boosted);
      break;
  }
  return m;
}

std::string model_to_json(const Model& m)
{
  nlohmann::json j;
  j["format"] = "lightfire-model";
  j["version"] = MODEL_FORMAT_VERSION;
  j["kind"] = model_kind_name(m.kind);
  j["features"] = m.features;
  if (const auto* lr = std::get_if<LogisticModel>(&m.fit))
  {
    j["mean"] = lr->mean;
    j["sd"] = lr->sd;
    j["weights"] = lr->weights;
    j["bias"] = lr->bias;
    j["iterations"] = lr->iterations;
  }
  else if (const auto* rf = std::get_if<ForestModel>(&m.fit))
  {
    j["max_features"] = rf->max_features;
    j["tree_seeds"] = rf->tree_seeds;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : rf->trees)
    {
      trees.push_back(tree_to_json(t));
    }
  }
  else if (const auto* gb = std::get_if<BoostedEnsemble>(&m.fit))
  {
    j["base_score"] = gb->base_score;
    j["learning_rate"] = gb->learning_rate;
    j["lambda"] = gb->lambda;
    j["damped_rounds"] = gb->damped_rounds;
    j["loss_history"] = gb->loss_history;
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : gb->trees)
    {
      trees.push_back(tree_to_json(t));
    }
  }
  return j.dump(1) + "\n";
}

Model model_from_json(const std::string_view text)
{
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(text);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
  if (j.value("format", "") != "lightfire-model")
  {
    throw std::runtime_error("model file: unknown format");
  }
  if (j.value("version", -1) != MODEL_FORMAT_VERSION)
  {
    throw std::runtime_error("model file: unsupported version " + j.value("version", nlohmann::json()).dump());
  }
  try
  {
    Model m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.features = j.at("features").get<std::vector<std::string>>();
    switch (m.kind)
    {
      case ModelKind::logreg:
      {
        LogisticModel lr;
        lr.mean = j.at("mean").get<std::vector<double>>();
        lr.sd = j.at("sd").get<std::vector<double>>();
        lr.weights = j.at("weights").get<std::vector<double>>();
        lr.bias = j.at("bias").get<double>();
        lr.iterations = j.value("iterations", 0);
        if (lr.mean.size() != m.features.size() || lr.sd.size() != m.features.size()
            || lr.weights.size() != m.features.size())
        {
          throw std::runtime_error("model file: parameter length differs from feature count");
        }
        m.fit = std::move(lr);
        break;
      }
      case ModelKind::forest:
      {
        ForestModel rf;
        rf.max_features = j.at("max_features").get<std::size_t>();
        rf.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
        for (const auto& t : j.at("trees"))
        {
          rf.trees.push_back(tree_from_json(t));
        }
        if (rf.trees.empty())
        {
          throw std::runtime_error("model file: forest has no trees");
        }
        m.fit = std::move(rf);
        break;
      }
      case ModelKind::boosted:
      {
        BoostedEnsemble gb;
        gb.base_score = j.at("base_score").get<double>();
        gb.learning_rate = j.at("learning_rate").get<double>();
        gb.lambda = j.at("lambda").get<double>();
        gb.damped_rounds = j.value("damped_rounds", 0);
        gb.loss_history = j.at("loss_history").get<std::vector<double>>();
        for (const auto& t : j.at("trees"))
        {
          gb.trees.push_back(tree_from_json(t));
        }
        m.fit = std::move(gb);
        break;
      }
    }
    return m;
  }
  catch (const nlohmann::json::exception& e)
  {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
}

void save_model(const Model& m, const std::filesystem::path& path)
{
  write_text_file(path, model_to_json(m));
}

Model load_model(const std::filesystem::path& path)
{
  if (!std::filesystem::exists(path))
  {
    throw std::runtime_error("model file not found: " + path.string());
  }
  return model_from_json(read_text_file(path));
}
}
