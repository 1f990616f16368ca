#include "lightfire/csv.h"
#include "lightfire/util.h"
#include "pipeline.h"
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <array>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <regex>

using namespace lightfire;
using namespace lightfire::pipeline;
namespace fs = std::filesystem;

namespace
{
std::string error_of(const std::function<void()>& fn)
{
  try
  {
    fn();
  }
  catch (const std::exception& e)
  {
    return e.what();
  }
  return {};
}

const char* SMALL = R"({
  "seed": 3,
  "synth": {"n_cells": 16, "n_days": 900, "spinup_days": 100},
  "train": {"forest": {"trees": 10}, "boosted": {"rounds": 30, "max_depth": 3}},
  "ablation": {"feature_sets": [1, 5], "models": ["logreg", "boosted"]},
  "climate": {"samples": 500},
  "importance_repeats": 2
})";

fs::path scratch(const std::string& name)
{
  const auto d = fs::temp_directory_path() / ("lightfire_test_cli_" + name);
  fs::remove_all(d);
  return d;
}

struct Proc
{
  int status{0};
  std::string out;
};

Proc run_cli(const std::string& args)
{
  Proc p;
  const std::string cmd = std::string(LIGHTFIRE_CLI) + " " + args + " 2>&1";
  FILE* f = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  while (const auto n = fread(buf.data(), 1, buf.size(), f))
  {
    p.out.append(buf.data(), n);
  }
  p.status = pclose(f);
  return p;
}
}

TEST(Config, ParsesNestedFields)
{
  const auto cfg = parse_config(SMALL, "small.json");
  EXPECT_EQ(*cfg.seed, 3u);
  EXPECT_EQ(cfg.synth.n_cells, 16);
  EXPECT_EQ(cfg.train.forest.trees, 10);
  EXPECT_EQ(cfg.train.boosted.max_depth, 3);
  EXPECT_EQ(cfg.ablation_sets, (std::vector<int>{1, 5}));
  EXPECT_EQ(cfg.ablation_models.size(), 2u);
  EXPECT_EQ(cfg.climate_samples, 500u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ErrorsNameTheField)
{
  EXPECT_NE(error_of([] { parse_config(R"({"seed": 1, "labeling": {"radius": 3}})", "c"); }).find("labeling.radius"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"seed": "x"})", "c"); }).find("'seed'"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"seed": 1, "model": "svm"})", "c"); }).find("'model'"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"seed": 1, "train": {"boosted": {"rounds": 1.5}}})", "c"); })
              .find("train.boosted.rounds"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_config("{", "broken.json"); }).find("broken.json: invalid JSON"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config("{}", "c").validate(); }).find("'seed' is required"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"seed": 1, "feature_set": 9})", "c").validate(); }).find("feature_set"),
            std::string::npos);
  EXPECT_NE(error_of([] { parse_config(R"({"seed": 1, "climate": {"region_deg": 7}})", "c").validate(); })
              .find("climate.region_deg"),
            std::string::npos);
  EXPECT_NE(error_of([] { load_config("/nonexistent/run.json"); }).find("config file not found"), std::string::npos);
}

TEST(Stages, MissingInputsAndArtifactsReported)
{
  auto cfg = parse_config(SMALL, "small.json");
  cfg.out = scratch("missing");
  EXPECT_NE(error_of([&] { run_stage("eval", cfg); }).find("model file not found"), std::string::npos);
  EXPECT_NE(error_of([&] { run_stage("label", cfg); }).find("config field 'paths.fires': file not found"),
            std::string::npos);
  EXPECT_NE(error_of([&] { run_stage("bogus", cfg); }).find("unknown stage"), std::string::npos);
  const auto line = run_stage("report", cfg);
  EXPECT_EQ(line.rfind("report: missing=", 0), 0u) << line;
  const auto md = read_text_file(cfg.out / "summary.md");
  EXPECT_NE(md.find("not run (projection_summary.json missing)"), std::string::npos);
  EXPECT_NE(md.find("## Missing artifacts"), std::string::npos);
  fs::remove_all(cfg.out);
}

TEST(Stages, SmokePathEmitsEveryArtifact)
{
  auto cfg = parse_config(SMALL, "small.json");
  cfg.out = scratch("smoke");
  const std::regex hash_re(R"( [a-z_]+\.(csv|json|md)=[0-9a-f]{16})");
  for (const auto* stage : STAGES)
  {
    const auto line = run_stage(stage, cfg);
    EXPECT_EQ(line.rfind(std::string(stage) + ":", 0), 0u) << line;
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_TRUE(std::regex_search(line, hash_re)) << line;
  }
  for (const auto* f : {"fires.csv", "thunder.csv", "weather.csv", "static.csv", "truth.csv", "labeled.csv",
                        "features.csv", "pearson.csv", "histograms.csv", "model.json", "metrics.json",
                        "importance.csv", "ablation.csv", "cross_type.csv", "trend_grid.csv", "trend_summary.json",
                        "projection_grid.csv", "projection_summary.json", "summary.md"})
  {
    EXPECT_TRUE(fs::exists(cfg.out / f)) << f;
  }
  const auto metrics = nlohmann::json::parse(read_text_file(cfg.out / "metrics.json"));
  EXPECT_TRUE(metrics.contains("test"));
  const auto md = read_text_file(cfg.out / "summary.md");
  EXPECT_EQ(md.find("not run"), std::string::npos);
  const auto t = csv::Table::read(cfg.out / "ablation.csv");
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    std::string row = "|";
    for (std::size_t c = 0; c < t.header().size(); ++c)
    {
      row += " " + t.at(r, c) + " |";
    }
    EXPECT_NE(md.find(row), std::string::npos) << row;
  }

  const auto before = read_text_file(cfg.out / "labeled.csv");
  const auto fires = read_text_file(cfg.out / "fires.csv");
  run_stage("label", cfg);
  EXPECT_EQ(read_text_file(cfg.out / "labeled.csv"), before);
  EXPECT_EQ(read_text_file(cfg.out / "fires.csv"), fires);
  fs::remove_all(cfg.out);
}

TEST(Binary, FlagsAndEnvironment)
{
  const auto dir = scratch("binary");
  auto p = run_cli("synth --out " + dir.string());
  EXPECT_NE(p.status, 0);
  EXPECT_NE(p.out.find("lightfire synth: error: config field 'seed' is required"), std::string::npos) << p.out;
  p = run_cli("train --model svm --seed 1");
  EXPECT_NE(p.status, 0);
  p = run_cli("");
  EXPECT_NE(p.status, 0);
  p = run_cli("eval --seed 1 --out " + dir.string());
  EXPECT_NE(p.status, 0);
  EXPECT_NE(p.out.find("model file not found"), std::string::npos) << p.out;
  p = run_cli(std::string("report --seed 1 --out ") + dir.string());
  EXPECT_EQ(p.status, 0) << p.out;
  EXPECT_NE(p.out.find("report: missing="), std::string::npos) << p.out;
  EXPECT_NE(p.out.find("[warning]"), std::string::npos) << p.out;
  const std::string cmd = "PIPELINE_LOG=loud " + std::string(LIGHTFIRE_CLI) + " report --seed 1 >/dev/null 2>&1";
  EXPECT_NE(std::system(cmd.c_str()), 0);
  fs::remove_all(dir);
}
