#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lightfire::models
{
/// Dense row-major n x d design with binary labels.
struct DesignMatrix
{
  std::vector<std::string> names;
  std::vector<double> x;
  std::vector<std::uint8_t> y;
  std::size_t n{0};
  std::size_t d{0};

  [[nodiscard]] double at(const std::size_t i, const std::size_t j) const { return x[i * d + j]; }
  [[nodiscard]] std::span<const double> row(const std::size_t i) const { return {x.data() + i * d, d}; }
  /// Throws on shape mismatch, non-finite entries, duplicate names, or n == 0.
  void validate() const;
};
DesignMatrix make_design(std::vector<std::string> names,
                         const std::vector<std::vector<double>>& rows,
                         const std::vector<bool>& labels);

enum class ModelKind
{
  logreg,
  forest,
  boosted
};
const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct LogisticConfig
{
  double l2{1e-4};
  int max_iterations{5000};
  double gradient_tolerance{1e-6};
};
struct LogisticModel
{
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> weights;
  double bias{0.0};
  int iterations{0};
  [[nodiscard]] double predict_proba(std::span<const double> row) const;
};
/// Mean log-loss plus (l2/2)|w|^2 over standardized features. theta = (w..., b).
class LogisticObjective
{
public:
  LogisticObjective(const DesignMatrix& X, double l2);
  [[nodiscard]] double value(std::span<const double> theta) const;
  [[nodiscard]] std::vector<double> gradient(std::span<const double> theta) const;
  [[nodiscard]] std::size_t dimension() const { return d_ + 1; }
  [[nodiscard]] const std::vector<double>& mean() const { return mean_; }
  [[nodiscard]] const std::vector<double>& sd() const { return sd_; }
private:
  std::size_t n_;
  std::size_t d_;
  double l2_;
  std::vector<double> z_;
  std::vector<double> y_;
  std::vector<double> mean_;
  std::vector<double> sd_;
};
/// Throws std::invalid_argument on single-class labels.
LogisticModel train_logistic(const DesignMatrix& X, const LogisticConfig& cfg = {});

struct TreeNode
{
  /// -1 marks a leaf
  int feature{-1};
  double threshold{0.0};
  int left{-1};
  int right{-1};
  double value{0.0};
};
struct DecisionTree
{
  std::vector<TreeNode> nodes;
  int max_depth{0};
  /// Samples with x[feature] <= threshold go left.
  [[nodiscard]] double predict(std::span<const double> row) const;
  [[nodiscard]] int depth() const;
  [[nodiscard]] std::size_t leaves() const;
};

struct TreeConfig
{
  int max_depth{8};
  /// minimum (weighted) sample count in each child
  double min_leaf{1.0};
  /// features examined per split; 0 means all
  std::size_t max_features{0};
  std::uint64_t seed{0};
};
/// Gini-impurity CART. `weights` are per-row integer multiplicities (empty means all ones).
DecisionTree train_tree(const DesignMatrix& X, const TreeConfig& cfg = {}, std::span<const double> weights = {});

struct ForestConfig
{
  int trees{100};
  int max_depth{10};
  double min_leaf{1.0};
  bool bootstrap{true};
  /// features per split; 0 means floor(sqrt(d))
  std::size_t max_features{0};
  std::uint64_t seed{0};
};
struct ForestModel
{
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t max_features{0};
  [[nodiscard]] double predict_proba(std::span<const double> row) const;
};
ForestModel train_forest(const DesignMatrix& X, const ForestConfig& cfg = {});

struct BoostConfig
{
  int rounds{200};
  int max_depth{6};
  double learning_rate{0.1};
  double lambda{1.0};
  double gamma{0.0};
  double min_child_weight{1.0};
};
struct BoostedEnsemble
{
  double base_score{0.0};
  /// leaf values already include learning rate and any damping
  std::vector<DecisionTree> trees;
  double learning_rate{0.1};
  double lambda{1.0};
  std::vector<double> loss_history;
  /// rounds whose step was halved to keep training loss from rising
  int damped_rounds{0};
  [[nodiscard]] double margin(std::span<const double> row) const;
  [[nodiscard]] double predict_proba(std::span<const double> row) const;
};
/// Fit one second-order regression tree to gradients and hessians.
DecisionTree fit_gradient_tree(const DesignMatrix& X,
                               std::span<const double> grad,
                               std::span<const double> hess,
                               const BoostConfig& cfg);
BoostedEnsemble train_boosted(const DesignMatrix& X, const BoostConfig& cfg = {});

double log_loss(std::span<const double> prob, std::span<const std::uint8_t> y);

struct TrainConfig
{
  LogisticConfig logistic;
  ForestConfig forest;
  BoostConfig boosted;
};

/// A fitted model of any kind together with its input column names.
struct Model
{
  ModelKind kind{ModelKind::logreg};
  std::vector<std::string> features;
  std::variant<LogisticModel, ForestModel, BoostedEnsemble> fit;
  [[nodiscard]] double predict_proba(std::span<const double> row) const;
  [[nodiscard]] std::vector<double> predict_all(const DesignMatrix& X) const;
};
Model train(ModelKind kind, const DesignMatrix& X, const TrainConfig& cfg);

inline constexpr int MODEL_FORMAT_VERSION = 1;
std::string model_to_json(const Model& m);
/// Throws on an unknown format or version.
Model model_from_json(std::string_view text);
void save_model(const Model& m, const std::filesystem::path& path);
/// Throws "model file not found: <path>" when absent.
Model load_model(const std::filesystem::path& path);

struct Confusion
{
  std::size_t tp{0};
  std::size_t fp{0};
  std::size_t fn{0};
  std::size_t tn{0};
};
struct MetricsReport
{
  Confusion confusion;
  double accuracy{0.0};
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};
  /// empty when the test set has a single class
  std::optional<double> roc_auc;
  std::size_t n{0};
};
MetricsReport metrics_from_confusion(const Confusion& c);
/// Mann-Whitney rank statistic with average ranks for ties. Empty for a single class.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const std::uint8_t> y);
/// Class metrics at threshold 0.5 (score >= 0.5 is positive).
MetricsReport evaluate(std::span<const double> prob, std::span<const std::uint8_t> y);
MetricsReport evaluate(const Model& m, const DesignMatrix& X);
}
