#include "pipeline.h"
#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>
#include <cstdlib>
#include <iostream>

namespace
{
struct Overrides
{
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> radius_km;
  std::optional<int> holdover_days;
  std::optional<int> holdout_year;
  std::optional<std::string> model;
  std::optional<int> feature_set;
  std::optional<std::string> out;
};

void add_flags(CLI::App& app, Overrides& o)
{
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--seed", o.seed, "run seed (required here or in the config)");
  app.add_option("--workers", o.workers, "worker threads; never changes outputs")->check(CLI::PositiveNumber);
  app.add_option("--radius-km", o.radius_km, "labeling radius in km");
  app.add_option("--holdover-days", o.holdover_days, "ignition lookback in days");
  app.add_option("--holdout-year", o.holdout_year, "calendar year kept out of training");
  app.add_option("--model", o.model, "model kind")->check(CLI::IsMember({"logreg", "forest", "boosted"}));
  app.add_option("--feature-set", o.feature_set, "feature groups (Model 1..5)")->check(CLI::Range(1, 5));
  app.add_option("--out", o.out, "output directory");
}

lightfire::pipeline::RunConfig resolve(const Overrides& o)
{
  auto cfg = o.config ? lightfire::pipeline::load_config(*o.config) : lightfire::pipeline::RunConfig{};
  if (o.seed)
  {
    cfg.seed = *o.seed;
  }
  if (o.workers)
  {
    cfg.workers = *o.workers;
  }
  if (o.radius_km)
  {
    cfg.labeling.radius_km = *o.radius_km;
  }
  if (o.holdover_days)
  {
    cfg.labeling.holdover_days = *o.holdover_days;
  }
  if (o.holdout_year)
  {
    cfg.labeling.holdout_year = *o.holdout_year;
  }
  if (o.model)
  {
    cfg.model = lightfire::models::parse_model_kind(*o.model);
  }
  if (o.feature_set)
  {
    cfg.feature_set = *o.feature_set;
  }
  if (o.out)
  {
    cfg.out = *o.out;
  }
  return cfg;
}

bool configure_logging()
{
  auto logger = spdlog::stderr_logger_mt("lightfire");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("PIPELINE_LOG");
  const std::string level = env ? env : "warn";
  if (level == "error" || level == "warn" || level == "info" || level == "debug")
  {
    spdlog::set_level(spdlog::level::from_str(level));
    return true;
  }
  std::cerr << "lightfire: PIPELINE_LOG must be one of error, warn, info, debug (got '" << level << "')\n";
  return false;
}
}

int main(int argc, char** argv)
{
  if (!configure_logging())
  {
    return 2;
  }
  CLI::App app{"Lightning ignition risk pipeline"};
  app.require_subcommand(1);
  Overrides o;
  for (const auto* stage : lightfire::pipeline::STAGES)
  {
    add_flags(*app.add_subcommand(stage, std::string("run the ") + stage + " stage"), o);
  }
  CLI11_PARSE(app, argc, argv);
  const auto stage = app.get_subcommands().front()->get_name();
  try
  {
    std::cout << lightfire::pipeline::run_stage(stage, resolve(o)) << "\n";
  }
  catch (const std::exception& e)
  {
    std::cerr << "lightfire " << stage << ": error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
