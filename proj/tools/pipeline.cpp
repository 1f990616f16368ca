#include "pipeline.h"
#include "lightfire/csv.h"
#include "lightfire/experiments.h"
#include "lightfire/features.h"
#include "lightfire/util.h"
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lightfire::pipeline
{
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
// salts for the per-stage streams derived from the run seed
constexpr std::uint64_t SALT_LABEL = 1;
constexpr std::uint64_t SALT_REBALANCE = 2;
constexpr std::uint64_t SALT_FOREST = 3;
constexpr std::uint64_t SALT_IMPORTANCE = 4;
constexpr std::uint64_t SALT_CLIMATE = 5;

class Fields
{
public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
    {
      throw std::invalid_argument("config field '" + display() + "': expected an object");
    }
  }
  template <class T>
  void get(const char* key, T& out)
  {
    if (!j_.contains(key))
    {
      return;
    }
    seen_.insert(key);
    const auto& v = j_.at(key);
    const auto name = qualified(key);
    if constexpr (std::is_same_v<T, bool>)
    {
      if (!v.is_boolean())
      {
        throw std::invalid_argument("config field '" + name + "': expected a boolean");
      }
    }
    else if constexpr (std::is_integral_v<T>)
    {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0))
      {
        throw std::invalid_argument("config field '" + name + "': expected a non-negative integer");
      }
    }
    else if constexpr (std::is_floating_point_v<T>)
    {
      if (!v.is_number())
      {
        throw std::invalid_argument("config field '" + name + "': expected a number");
      }
    }
    else if constexpr (std::is_same_v<T, std::string>)
    {
      if (!v.is_string())
      {
        throw std::invalid_argument("config field '" + name + "': expected a string");
      }
    }
    try
    {
      out = v.get<T>();
    }
    catch (const json::exception&)
    {
      throw std::invalid_argument("config field '" + name + "': wrong type");
    }
  }
  void path(const char* key, std::optional<fs::path>& out)
  {
    std::string s;
    if (j_.contains(key))
    {
      get(key, s);
      out = s;
    }
  }
  template <class F>
  void with(const char* key, F&& f)
  {
    if (!j_.contains(key))
    {
      return;
    }
    seen_.insert(key);
    Fields child(j_.at(key), qualified(key));
    f(child);
    child.finish();
  }
  [[nodiscard]] std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void finish() const
  {
    for (const auto& [k, v] : j_.items())
    {
      if (!seen_.contains(k))
      {
        throw std::invalid_argument("config: unknown field '" + qualified(k) + "'");
      }
    }
  }
private:
  [[nodiscard]] std::string display() const { return path_.empty() ? "<root>" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string hashed(const fs::path& p)
{
  return p.filename().string() + "=" + hex64(hash_file(p));
}

void write(const fs::path& p, const std::string& text, std::vector<std::string>& hashes)
{
  write_text_file(p, text);
  hashes.push_back(hashed(p));
  spdlog::debug("wrote {}", p.string());
}

std::string join(const std::vector<std::string>& parts, const char* sep = " ")
{
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i)
  {
    s += (i ? sep : "") + parts[i];
  }
  return s;
}

std::string summary(const std::string& stage, const std::vector<std::string>& stats, const std::vector<std::string>& hashes)
{
  auto s = stage + ":";
  if (!stats.empty())
  {
    s += " " + join(stats);
  }
  if (!hashes.empty())
  {
    s += " | " + join(hashes);
  }
  return s;
}

std::string kv(const std::string& k, const std::size_t v)
{
  return k + "=" + std::to_string(v);
}

std::string kv(const std::string& k, const double v)
{
  return k + "=" + format_double(v);
}

fs::path require(const fs::path& p, const std::string& field)
{
  if (!fs::exists(p))
  {
    throw std::runtime_error("config field '" + field + "': file not found: " + p.string());
  }
  return p;
}

fs::path require_artifact(const fs::path& p, const char* producer)
{
  if (!fs::exists(p))
  {
    throw std::runtime_error(p.filename().string() + " not found in " + p.parent_path().string() + " (run '"
                             + producer + "' first)");
  }
  return p;
}

models::TrainConfig train_config(const RunConfig& cfg)
{
  auto t = cfg.train;
  t.forest.seed = derive_seed(*cfg.seed, SALT_FOREST);
  return t;
}

labeler::LabelingConfig labeling(const RunConfig& cfg)
{
  auto l = cfg.labeling;
  l.seed = derive_seed(*cfg.seed, SALT_LABEL);
  return l;
}

void log_warnings(const std::vector<std::string>& w)
{
  for (const auto& m : w)
  {
    spdlog::warn("{}", m);
  }
}

struct Inputs
{
  ingest::WeatherTable weather;
  ingest::StaticTable statics;
  std::optional<ingest::FwiTable> fwi;
  [[nodiscard]] features::Tables tables() const { return {&weather, &statics, fwi ? &*fwi : nullptr}; }
};

Inputs load_inputs(const RunConfig& cfg)
{
  Inputs in{ingest::WeatherTable(ingest::read_weather(require(cfg.input(cfg.weather_path, "weather.csv"), "paths.weather"))),
            ingest::index_static(ingest::read_static(require(cfg.input(cfg.static_path, "static.csv"), "paths.static"))),
            std::nullopt};
  const auto fwi = cfg.input(cfg.fwi_path, "fwi.csv");
  if (fs::exists(fwi))
  {
    in.fwi.emplace(ingest::read_fwi(fwi));
  }
  else if (cfg.fwi_path)
  {
    require(fwi, "paths.fwi");
  }
  return in;
}

struct FeatureStats
{
  std::size_t rows{0};
  std::size_t dropped{0};
  std::size_t rebalanced{0};
};

FeatureStats build_features(const RunConfig& cfg,
                            const Inputs& in,
                            const fs::path& labeled,
                            const fs::path& out_csv,
                            const std::uint64_t salt,
                            std::vector<std::string>& hashes,
                            features::FeatureTable& table)
{
  const auto samples = labeler::read_labeled(labeled);
  const features::Assembler assembler(in.tables(), features::FeatureSetConfig::model(5));
  auto rows = features::assemble_all(assembler, samples);
  const auto drop = ingest::drop_incomplete(rows);
  log_warnings(drop.warnings);
  spdlog::info("{}: dropped {} incomplete rows ({} positive, {} negative, fraction {})", labeled.filename().string(),
               drop.removed, drop.removed_positive, drop.removed_negative, drop.fraction);
  const auto removed = features::rebalance(rows, derive_seed(derive_seed(*cfg.seed, SALT_REBALANCE), salt));
  table = features::FeatureTable{assembler.names(), std::move(rows)};
  write(out_csv, features::write_features(table), hashes);
  return {table.rows.size(), drop.removed, removed};
}

/// Random thunder cell-days assembled with every feature group; rows with empty inputs are skipped.
struct ClimateSamples
{
  std::vector<labeler::LabeledSample> samples;
  features::FeatureTable table;
  std::size_t drawn{0};
  std::size_t skipped{0};
};

ClimateSamples climate_samples(const RunConfig& cfg, const Inputs& in, const models::Model& model)
{
  const auto thunder = ingest::read_thunder(require(cfg.input(cfg.thunder_path, "thunder.csv"), "paths.thunder"));
  Rng rng(derive_seed(*cfg.seed, SALT_CLIMATE));
  auto picks = sample_without_replacement(thunder.size(), std::min(cfg.climate_samples, thunder.size()), rng);
  std::sort(picks.begin(), picks.end());
  const features::Assembler assembler(in.tables(), features::FeatureSetConfig::model(5));
  std::vector<std::size_t> pos;
  for (const auto& f : model.features)
  {
    const auto it = std::find(assembler.names().begin(), assembler.names().end(), f);
    if (it == assembler.names().end())
    {
      throw std::runtime_error("model feature " + f + " is not an assembled column");
    }
    pos.push_back(static_cast<std::size_t>(it - assembler.names().begin()));
  }
  std::vector<labeler::LabeledSample> candidates;
  candidates.reserve(picks.size());
  for (const auto i : picks)
  {
    labeler::LabeledSample s;
    s.anchor = geo::THUNDER_GRID.center(thunder[i].cell);
    s.date = thunder[i].date;
    s.origin = "thunder:" + std::to_string(thunder[i].cell.row) + ":" + std::to_string(thunder[i].cell.col);
    candidates.push_back(std::move(s));
  }
  std::vector<std::optional<features::FeatureRow>> rows(candidates.size());
  parallel_for(candidates.size(), [&](const std::size_t i) {
    try
    {
      auto r = assembler.assemble(candidates[i]);
      for (const auto p : pos)
      {
        if (!r.values[p])
        {
          return;
        }
      }
      rows[i] = std::move(r);
    }
    catch (const std::runtime_error&)
    {
      // uncovered cell or short history
    }
  });
  ClimateSamples out;
  out.drawn = candidates.size();
  out.table.names = assembler.names();
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    if (rows[i])
    {
      out.samples.push_back(candidates[i]);
      out.table.rows.push_back(std::move(*rows[i]));
    }
    else
    {
      ++out.skipped;
    }
  }
  if (out.samples.empty())
  {
    throw std::runtime_error("no thunder sample could be assembled for the climate analysis");
  }
  return out;
}

std::string markdown_table(const fs::path& csv_path)
{
  const auto t = csv::Table::read(csv_path);
  std::string s = "| " + join(t.header(), " | ") + " |\n|";
  for (std::size_t i = 0; i < t.header().size(); ++i)
  {
    s += "---|";
  }
  s += "\n";
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    std::vector<std::string> cells;
    for (std::size_t c = 0; c < t.header().size(); ++c)
    {
      cells.push_back(t.at(r, c));
    }
    s += "| " + join(cells, " | ") + " |\n";
  }
  return s;
}

std::string json_value(const json& v)
{
  if (v.is_null())
  {
    return "undefined";
  }
  if (v.is_number_float())
  {
    return format_double(v.get<double>());
  }
  return v.is_string() ? v.get<std::string>() : v.dump();
}

// ---- stages ----

std::string stage_synth(const RunConfig& cfg)
{
  auto sc = cfg.synth;
  sc.seed = *cfg.seed;
  const auto world = ingest::synth_world(sc);
  const auto dir = cfg.data_dir.value_or(cfg.out);
  std::vector<std::string> hashes;
  for (const auto& p : ingest::write_world(world, dir, sc.write_fwi))
  {
    hashes.push_back(hashed(p));
  }
  std::size_t lightning = 0;
  for (const auto& t : world.truth)
  {
    lightning += t.cause == ingest::IgnitionCause::lightning;
  }
  return summary("synth",
                 {kv("fires", world.fires.size()), kv("lightning", lightning),
                  kv("anthropogenic", world.fires.size() - lightning), kv("thunder", world.thunder.size()),
                  kv("weather", world.weather.size()), kv("cells", world.statics.size())},
                 hashes);
}

std::string stage_label(const RunConfig& cfg)
{
  const auto fires = ingest::read_fires(require(cfg.input(cfg.fires_path, "fires.csv"), "paths.fires"));
  const auto thunder = ingest::read_thunder(require(cfg.input(cfg.thunder_path, "thunder.csv"), "paths.thunder"));
  const ingest::WeatherTable weather(ingest::read_weather(require(cfg.input(cfg.weather_path, "weather.csv"), "paths.weather")));
  const auto lab = labeling(cfg);
  std::vector<std::string> hashes;
  const auto ds = labeler::build_dataset(fires, thunder, lab, labeler::DatasetKind::lightning);
  log_warnings(ds.report.warnings);
  write(cfg.out / "labeled.csv", labeler::write_labeled(ds.samples), hashes);
  std::vector<std::string> stats{kv("fires", ds.report.fires_in),          kv("short", ds.report.short_fires),
                                 kv("lightning", ds.report.lightning),     kv("anthropogenic", ds.report.anthropogenic),
                                 kv("positives", ds.report.positives),     kv("negatives", ds.report.negatives),
                                 kv("train", ds.report.train),             kv("test", ds.report.test),
                                 kv("holdout", ds.report.holdout)};
  if (ds.report.anthropogenic > 0)
  {
    const auto domain = labeler::domain_of(weather, features::LagOptions{}.dry_window_days);
    auto anth_cfg = lab;
    anth_cfg.seed = derive_seed(lab.seed, 1);
    const auto ads = labeler::build_dataset(fires, thunder, anth_cfg, labeler::DatasetKind::anthropogenic, &domain);
    log_warnings(ads.report.warnings);
    write(cfg.out / "labeled_anthropogenic.csv", labeler::write_labeled(ads.samples), hashes);
    stats.push_back(kv("anthropogenic_samples", ads.samples.size()));
  }
  else
  {
    spdlog::warn("no anthropogenic fires; labeled_anthropogenic.csv not written");
  }
  return summary("label", stats, hashes);
}

std::string stage_features(const RunConfig& cfg)
{
  const auto in = load_inputs(cfg);
  std::vector<std::string> hashes;
  features::FeatureTable table;
  const auto st = build_features(cfg, in, require_artifact(cfg.out / "labeled.csv", "label"), cfg.out / "features.csv",
                                 0, hashes, table);
  std::vector<std::string> stats{kv("rows", st.rows), kv("dropped", st.dropped), kv("rebalanced", st.rebalanced),
                                 kv("columns", table.names.size())};

  auto cols = features::columns_of(table, true);
  auto names = table.names;
  names.emplace_back("ignition");
  write(cfg.out / "pearson.csv", features::write_correlation(features::pearson_matrix(cols, names)), hashes);
  cols.pop_back();
  std::vector<std::uint8_t> labels;
  for (const auto& r : table.rows)
  {
    labels.push_back(r.label ? 1 : 0);
  }
  const auto hists = features::class_histograms(cols, table.names, labels, cfg.histogram_bins);
  write(cfg.out / "histograms.csv", features::write_histograms(hists), hashes);

  const auto anth = cfg.out / "labeled_anthropogenic.csv";
  if (fs::exists(anth))
  {
    features::FeatureTable at;
    const auto ast = build_features(cfg, in, anth, cfg.out / "features_anthropogenic.csv", 1, hashes, at);
    stats.push_back(kv("anthropogenic_rows", ast.rows));
  }
  return summary("features", stats, hashes);
}

std::string stage_train(const RunConfig& cfg)
{
  const auto table = features::read_features(require_artifact(cfg.out / "features.csv", "features"));
  const auto cols = features::column_names(features::FeatureSetConfig::model(cfg.feature_set));
  const std::array train_split{labeler::Split::train};
  const auto X = experiments::design_from(table, cols, train_split);
  const auto model = models::train(cfg.model, X, train_config(cfg));
  std::vector<std::string> hashes;
  write(cfg.out / "model.json", models::model_to_json(model), hashes);
  std::vector<std::string> stats{std::string("model=") + models::model_kind_name(cfg.model),
                                 "feature_set=" + std::to_string(cfg.feature_set), kv("rows", X.n),
                                 kv("features", X.d)};
  const auto p = model.predict_all(X);
  stats.push_back(kv("train_accuracy", models::evaluate(p, X.y).accuracy));
  if (const auto* gb = std::get_if<models::BoostedEnsemble>(&model.fit))
  {
    stats.push_back(kv("final_logloss", gb->loss_history.back()));
    stats.push_back("damped_rounds=" + std::to_string(gb->damped_rounds));
  }
  return summary("train", stats, hashes);
}

std::string stage_eval(const RunConfig& cfg)
{
  const auto model = models::load_model(cfg.out / "model.json");
  const auto table = features::read_features(require_artifact(cfg.out / "features.csv", "features"));
  std::vector<std::pair<std::string, models::MetricsReport>> named;
  const std::array test_split{labeler::Split::test};
  const auto Xte = experiments::design_from(table, model.features, test_split);
  const auto test = models::evaluate(model, Xte);
  if (!test.roc_auc)
  {
    spdlog::warn("test split has a single class; roc_auc undefined");
  }
  named.emplace_back("test", test);
  std::vector<std::string> stats{kv("test_n", test.n), kv("test_accuracy", test.accuracy)};
  const std::array holdout_split{labeler::Split::holdout};
  const bool has_holdout = std::any_of(table.rows.begin(), table.rows.end(),
                                       [](const auto& r) { return r.split == labeler::Split::holdout; });
  if (has_holdout)
  {
    const auto holdout = models::evaluate(model, experiments::design_from(table, model.features, holdout_split));
    named.emplace_back("holdout", holdout);
    stats.push_back(kv("holdout_n", holdout.n));
    stats.push_back(kv("holdout_accuracy", holdout.accuracy));
  }
  std::vector<std::string> hashes;
  write(cfg.out / "metrics.json", experiments::metrics_to_json(named), hashes);
  const auto drops =
    experiments::permutation_importance(model, Xte, derive_seed(*cfg.seed, SALT_IMPORTANCE), cfg.importance_repeats);
  write(cfg.out / "importance.csv", experiments::write_importance(model.features, drops), hashes);
  return summary("eval", stats, hashes);
}

std::string stage_ablate(const RunConfig& cfg)
{
  const auto table = features::read_features(require_artifact(cfg.out / "features.csv", "features"));
  const auto grid = experiments::ablation_grid(table, cfg.ablation_sets, cfg.ablation_models, train_config(cfg));
  std::vector<std::string> hashes;
  write(cfg.out / "ablation.csv", experiments::write_ablation(grid), hashes);
  const auto best = std::max_element(grid.begin(), grid.end(), [](const auto& a, const auto& b) {
    return a.test.accuracy < b.test.accuracy;
  });
  return summary("ablate",
                 {kv("cells", grid.size()),
                  "best=Model_" + std::to_string(best->feature_set) + "/" + models::model_kind_name(best->kind),
                  kv("best_accuracy", best->test.accuracy)},
                 hashes);
}

std::string stage_cross(const RunConfig& cfg)
{
  const auto l = features::read_features(require_artifact(cfg.out / "features.csv", "features"));
  const auto a = features::read_features(require_artifact(cfg.out / "features_anthropogenic.csv", "features"));
  const auto cells = experiments::cross_type(l, a, cfg.model, train_config(cfg), cfg.cross_sets);
  std::vector<std::string> hashes;
  write(cfg.out / "cross_type.csv", experiments::write_cross_type(cells), hashes);
  std::vector<std::string> stats;
  for (const auto& c : cells)
  {
    stats.push_back("M" + std::to_string(c.feature_set) + ":" + c.train_on.substr(0, 1) + "->" + c.test_on.substr(0, 1)
                    + "=" + format_double(c.accuracy));
  }
  return summary("cross", stats, hashes);
}

std::string stage_trend(const RunConfig& cfg)
{
  const auto model = models::load_model(cfg.out / "model.json");
  const auto in = load_inputs(cfg);
  const auto cs = climate_samples(cfg, in, model);
  const std::array all{labeler::Split::train, labeler::Split::test, labeler::Split::holdout};
  const auto X = experiments::design_from(cs.table, model.features, all);
  const auto scores = model.predict_all(X);
  std::vector<geo::GeoPoint> anchors;
  std::vector<int> years;
  for (const auto& r : cs.table.rows)
  {
    anchors.push_back(r.anchor);
    years.push_back(year_of(r.date));
  }
  const climate::RegionGrid grid{cfg.region_deg};
  const auto risk = climate::regional_risk(anchors, years, scores, grid);
  const auto trend = climate::annual_trend(risk);
  std::vector<std::string> hashes;
  write(cfg.out / "trend_grid.csv", climate::write_trend_grid(trend), hashes);
  write(cfg.out / "trend_grid.geojson", climate::trend_geojson(trend, grid), hashes);
  write(cfg.out / "trend_summary.json", climate::write_trend_summary(trend, scores.size()), hashes);
  std::vector<std::string> stats{kv("samples", scores.size()), kv("skipped", cs.skipped), kv("regions", trend.cells.size()),
                                 kv("excluded", trend.excluded)};
  if (trend.global_mean)
  {
    stats.push_back(kv("mean_annual_diff", *trend.global_mean));
    stats.push_back(kv("median_annual_diff", *trend.global_median));
  }
  return summary("trend", stats, hashes);
}

std::string stage_project(const RunConfig& cfg)
{
  const auto model = models::load_model(cfg.out / "model.json");
  const auto in = load_inputs(cfg);
  const auto cs = climate_samples(cfg, in, model);
  const climate::RegionGrid grid{cfg.region_deg};
  climate::ClimateDelta delta;
  delta.global = cfg.delta;
  const auto p = cfg.recompute ? climate::project_recompute(model, cs.samples, in.tables(), delta, grid)
                               : climate::project(model, cs.table, delta, grid);
  std::vector<std::string> hashes;
  write(cfg.out / "projection_grid.csv", climate::write_projection_grid(p), hashes);
  write(cfg.out / "projection_grid.geojson", climate::projection_geojson(p, grid), hashes);
  write(cfg.out / "projection_summary.json", climate::write_projection_summary(p, delta, cfg.recompute), hashes);
  std::vector<std::string> stats{std::string("mode=") + (cfg.recompute ? "recompute" : "hold_constant"),
                                 kv("samples", p.base.size()), kv("regions", p.cells.size()), kv("clamped", p.clamped),
                                 kv("risk_base", p.mean_base), kv("risk_projected", p.mean_projected)};
  if (p.ratio)
  {
    stats.push_back(kv("ratio", *p.ratio));
  }
  return summary("project", stats, hashes);
}

std::string stage_report(const RunConfig& cfg)
{
  std::vector<std::string> missing;
  std::ostringstream md;
  const auto section_csv = [&](const char* title, const char* file) {
    md << "## " << title << "\n\n";
    const auto p = cfg.out / file;
    if (!fs::exists(p))
    {
      md << "not run (" << file << " missing)\n\n";
      missing.emplace_back(file);
      return;
    }
    md << "Source: `" << file << "`\n\n" << markdown_table(p) << "\n";
  };
  const auto section_json = [&](const char* file) -> std::optional<json> {
    const auto p = cfg.out / file;
    if (!fs::exists(p))
    {
      md << "not run (" << file << " missing)\n\n";
      missing.emplace_back(file);
      return std::nullopt;
    }
    return json::parse(read_text_file(p));
  };

  md << "# Lightning ignition risk run summary\n\n";

  md << "## Evaluation metrics\n\n";
  if (const auto m = section_json("metrics.json"))
  {
    md << "Source: `metrics.json`\n\n| split | n | roc_auc | accuracy | f1 | precision | recall | tp | fp | fn | tn |\n"
       << "|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& [split, e] : m->items())
    {
      const auto& c = e.at("confusion");
      md << "| " << split << " | " << json_value(e.at("n")) << " | " << json_value(e.at("roc_auc")) << " | "
         << json_value(e.at("accuracy")) << " | " << json_value(e.at("f1")) << " | " << json_value(e.at("precision"))
         << " | " << json_value(e.at("recall")) << " | " << json_value(c.at("tp")) << " | " << json_value(c.at("fp"))
         << " | " << json_value(c.at("fn")) << " | " << json_value(c.at("tn")) << " |\n";
    }
    md << "\n";
  }
  section_csv("Feature-group ablation", "ablation.csv");
  section_csv("Cross ignition type", "cross_type.csv");
  section_csv("Permutation importance", "importance.csv");

  md << "## Annual risk trend\n\n";
  if (const auto t = section_json("trend_summary.json"))
  {
    md << "Source: `trend_summary.json`\n\n";
    for (const auto& [k, v] : t->items())
    {
      md << "- " << k << ": " << json_value(v) << "\n";
    }
    md << "\n";
  }
  section_csv("Trend by region", "trend_grid.csv");

  md << "## Climate projection\n\n";
  if (const auto p = section_json("projection_summary.json"))
  {
    md << "Source: `projection_summary.json`\n\n";
    for (const auto& [k, v] : p->items())
    {
      md << "- " << k << ": " << json_value(v) << "\n";
    }
    md << "\n";
  }
  section_csv("Projection by region", "projection_grid.csv");

  if (!missing.empty())
  {
    md << "## Missing artifacts\n\n";
    for (const auto& m : missing)
    {
      md << "- " << m << "\n";
    }
  }
  std::vector<std::string> hashes;
  write(cfg.out / "summary.md", md.str(), hashes);
  for (const auto& m : missing)
  {
    spdlog::warn("report: {} missing", m);
  }
  return summary("report", {kv("missing", missing.size())}, hashes);
}
}

fs::path RunConfig::input(const std::optional<fs::path>& p, const char* name) const
{
  return p ? *p : data_dir.value_or(out) / name;
}

void RunConfig::validate() const
{
  if (!seed)
  {
    throw std::invalid_argument("config field 'seed' is required");
  }
  if (workers < 1)
  {
    throw std::invalid_argument("config field 'workers' must be >= 1");
  }
  if (feature_set < 1 || feature_set > 5)
  {
    throw std::invalid_argument("config field 'feature_set' must be 1..5");
  }
  if (out.empty())
  {
    throw std::invalid_argument("config field 'out' must not be empty");
  }
  if (!(region_deg > 0.0) || !(std::fmod(180.0, region_deg) == 0.0))
  {
    throw std::invalid_argument("config field 'climate.region_deg' must divide 180");
  }
  if (climate_samples == 0)
  {
    throw std::invalid_argument("config field 'climate.samples' must be positive");
  }
  if (importance_repeats < 1)
  {
    throw std::invalid_argument("config field 'importance_repeats' must be >= 1");
  }
  if (histogram_bins < 1)
  {
    throw std::invalid_argument("config field 'histogram_bins' must be >= 1");
  }
  for (const int s : ablation_sets)
  {
    if (s < 1 || s > 5)
    {
      throw std::invalid_argument("config field 'ablation.feature_sets' entries must be 1..5");
    }
  }
  for (const int s : cross_sets)
  {
    if (s < 1 || s > 5)
    {
      throw std::invalid_argument("config field 'cross.feature_sets' entries must be 1..5");
    }
  }
  const auto wrap = [](const char* field, const auto& fn) {
    try
    {
      fn();
    }
    catch (const std::invalid_argument& e)
    {
      throw std::invalid_argument(std::string("config field '") + field + "': " + e.what());
    }
  };
  wrap("labeling", [&] { labeling.validate(); });
  wrap("synth", [&] { synth.validate(); });
  if (!std::isfinite(delta.rh) || !std::isfinite(delta.t) || !std::isfinite(delta.prec))
  {
    throw std::invalid_argument("config field 'climate.delta' must be finite");
  }
}

RunConfig parse_config(const std::string& text, const std::string& source)
{
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::parse_error& e)
  {
    throw std::invalid_argument(source + ": invalid JSON: " + e.what());
  }
  RunConfig cfg;
  Fields root(j, "");
  std::uint64_t seed = 0;
  if (j.is_object() && j.contains("seed"))
  {
    root.get("seed", seed);
    cfg.seed = seed;
  }
  root.get("workers", cfg.workers);
  std::string path;
  if (j.is_object() && j.contains("out"))
  {
    root.get("out", path);
    cfg.out = path;
  }
  root.path("data_dir", cfg.data_dir);
  root.with("paths", [&](Fields& f) {
    f.path("fires", cfg.fires_path);
    f.path("thunder", cfg.thunder_path);
    f.path("weather", cfg.weather_path);
    f.path("static", cfg.static_path);
    f.path("fwi", cfg.fwi_path);
  });
  root.get("radius_km", cfg.labeling.radius_km);
  root.get("holdover_days", cfg.labeling.holdover_days);
  root.get("holdout_year", cfg.labeling.holdout_year);
  root.get("feature_set", cfg.feature_set);
  if (j.is_object() && j.contains("model"))
  {
    std::string m;
    root.get("model", m);
    try
    {
      cfg.model = models::parse_model_kind(m);
    }
    catch (const std::invalid_argument& e)
    {
      throw std::invalid_argument(std::string("config field 'model': ") + e.what());
    }
  }
  root.get("importance_repeats", cfg.importance_repeats);
  root.get("histogram_bins", cfg.histogram_bins);
  root.with("labeling", [&](Fields& f) {
    f.get("radius_km", cfg.labeling.radius_km);
    f.get("holdover_days", cfg.labeling.holdover_days);
    f.get("min_duration_days", cfg.labeling.min_duration_days);
    f.get("holdout_year", cfg.labeling.holdout_year);
    f.get("test_fraction", cfg.labeling.test_fraction);
    std::string mode = "row";
    f.get("split_mode", mode);
    if (mode != "row" && mode != "year")
    {
      throw std::invalid_argument("config field 'labeling.split_mode': expected \"row\" or \"year\"");
    }
    cfg.labeling.split_mode = mode == "row" ? labeler::SplitMode::row : labeler::SplitMode::year;
  });
  root.with("train", [&](Fields& f) {
    f.with("logistic", [&](Fields& g) {
      g.get("l2", cfg.train.logistic.l2);
      g.get("max_iterations", cfg.train.logistic.max_iterations);
      g.get("gradient_tolerance", cfg.train.logistic.gradient_tolerance);
    });
    f.with("forest", [&](Fields& g) {
      g.get("trees", cfg.train.forest.trees);
      g.get("max_depth", cfg.train.forest.max_depth);
      g.get("min_leaf", cfg.train.forest.min_leaf);
      g.get("bootstrap", cfg.train.forest.bootstrap);
      g.get("max_features", cfg.train.forest.max_features);
    });
    f.with("boosted", [&](Fields& g) {
      g.get("rounds", cfg.train.boosted.rounds);
      g.get("max_depth", cfg.train.boosted.max_depth);
      g.get("learning_rate", cfg.train.boosted.learning_rate);
      g.get("lambda", cfg.train.boosted.lambda);
      g.get("gamma", cfg.train.boosted.gamma);
      g.get("min_child_weight", cfg.train.boosted.min_child_weight);
    });
  });
  root.with("synth", [&](Fields& f) {
    auto& s = cfg.synth;
    f.get("n_cells", s.n_cells);
    if (j["synth"].contains("start"))
    {
      std::string d;
      f.get("start", d);
      try
      {
        s.start = parse_date(d);
      }
      catch (const std::invalid_argument& e)
      {
        throw std::invalid_argument(std::string("config field 'synth.start': ") + e.what());
      }
    }
    f.get("spinup_days", s.spinup_days);
    f.get("n_days", s.n_days);
    f.get("lat_min", s.lat_min);
    f.get("lat_max", s.lat_max);
    f.get("lon_min", s.lon_min);
    f.get("lon_max", s.lon_max);
    f.get("storm_rate", s.storm_rate);
    f.get("fire_base_rate", s.fire_base_rate);
    f.get("anthropogenic_rate", s.anthropogenic_rate);
    f.get("single_day_fraction", s.single_day_fraction);
    f.get("missing_rate", s.missing_rate);
    f.get("holdover_lag_max", s.holdover_lag_max);
    f.get("write_fwi", s.write_fwi);
    f.with("planted", [&](Fields& g) {
      std::string shape = "logistic";
      g.get("shape", shape);
      if (shape != "logistic" && shape != "interaction")
      {
        throw std::invalid_argument("config field 'synth.planted.shape': expected \"logistic\" or \"interaction\"");
      }
      s.planted.shape = shape == "logistic" ? ingest::IgnitionLaw::Shape::logistic
                                            : ingest::IgnitionLaw::Shape::interaction;
      g.get("intercept", s.planted.intercept);
      g.get("w_ffmc", s.planted.w_ffmc);
      g.get("w_rh", s.planted.w_rh);
      g.get("w_prec", s.planted.w_prec);
      g.get("w_ndvi", s.planted.w_ndvi);
    });
    f.with("anthropogenic", [&](Fields& g) {
      g.get("intercept", s.anthro_intercept);
      g.get("w_pop", s.anthro_w_pop);
      g.get("w_t", s.anthro_w_t);
      g.get("w_sm", s.anthro_w_sm);
    });
  });
  root.with("ablation", [&](Fields& f) {
    f.get("feature_sets", cfg.ablation_sets);
    if (j["ablation"].contains("models"))
    {
      std::vector<std::string> names;
      f.get("models", names);
      cfg.ablation_models.clear();
      for (const auto& n : names)
      {
        try
        {
          cfg.ablation_models.push_back(models::parse_model_kind(n));
        }
        catch (const std::invalid_argument& e)
        {
          throw std::invalid_argument(std::string("config field 'ablation.models': ") + e.what());
        }
      }
    }
  });
  root.with("cross", [&](Fields& f) { f.get("feature_sets", cfg.cross_sets); });
  root.with("climate", [&](Fields& f) {
    f.get("region_deg", cfg.region_deg);
    f.get("samples", cfg.climate_samples);
    f.get("recompute", cfg.recompute);
    f.with("delta", [&](Fields& g) {
      g.get("rh", cfg.delta.rh);
      g.get("t", cfg.delta.t);
      g.get("prec", cfg.delta.prec);
    });
  });
  root.finish();
  return cfg;
}

RunConfig load_config(const fs::path& path)
{
  if (!fs::exists(path))
  {
    throw std::invalid_argument("config file not found: " + path.string());
  }
  return parse_config(read_text_file(path), path.string());
}

std::string run_stage(const std::string& stage, const RunConfig& cfg)
{
  cfg.validate();
  set_workers(cfg.workers);
  if (stage != "synth" || !cfg.data_dir)
  {
    fs::create_directories(cfg.out);
  }
  if (stage == "synth")
  {
    return stage_synth(cfg);
  }
  if (stage == "label")
  {
    return stage_label(cfg);
  }
  if (stage == "features")
  {
    return stage_features(cfg);
  }
  if (stage == "train")
  {
    return stage_train(cfg);
  }
  if (stage == "eval")
  {
    return stage_eval(cfg);
  }
  if (stage == "ablate")
  {
    return stage_ablate(cfg);
  }
  if (stage == "cross")
  {
    return stage_cross(cfg);
  }
  if (stage == "trend")
  {
    return stage_trend(cfg);
  }
  if (stage == "project")
  {
    return stage_project(cfg);
  }
  if (stage == "report")
  {
    return stage_report(cfg);
  }
  throw std::invalid_argument("unknown stage '" + stage + "'");
}
}
