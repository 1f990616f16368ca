#include "lightfire/labeler.h"
#include "lightfire/util.h"
#include "oracles.h"
#include <gtest/gtest.h>
#include <set>

using namespace lightfire;
using namespace lightfire::labeler;
using ingest::IgnitionCause;
using ingest::ThunderRecord;
using ingest::WildfireEvent;

namespace
{
const geo::CellId BASE_CELL = geo::cell_of({45.0, 10.0}, geo::THUNDER_GRID);

// Fire placed `km` north of the center of BASE_CELL.
WildfireEvent fire_north_of_base(const double km, const Date d, const std::string& id = "f")
{
  const auto c = geo::THUNDER_GRID.center(BASE_CELL);
  WildfireEvent f;
  f.fire_id = id;
  f.ignition = {c.lat + km / geo::KM_PER_DEGREE, c.lon};
  f.ignition_date = d;
  f.duration_days = 3;
  return f;
}

const Date D0 = make_date(2018, 7, 10);

std::vector<WildfireEvent> fires_with_years(const std::vector<int>& years, Rng& rng)
{
  std::vector<WildfireEvent> fires;
  for (std::size_t i = 0; i < years.size(); ++i)
  {
    WildfireEvent f;
    f.fire_id = "y" + std::to_string(i);
    f.ignition = {44.0 + rng.uniform(0, 4), 8.0 + rng.uniform(0, 4)};
    f.ignition_date = make_date(years[i], 6, 1) + std::chrono::days{static_cast<int>(rng.index(90))};
    f.duration_days = 2 + static_cast<int>(rng.index(4));
    fires.push_back(f);
  }
  return fires;
}

// A storm on each fire's ignition day at its cell, plus many other storm cell-days far from any fire.
std::vector<ThunderRecord> storms_for(const std::vector<WildfireEvent>& fires, const std::size_t extra, Rng& rng)
{
  std::set<std::pair<Date, geo::CellId>> keys;
  std::vector<ThunderRecord> out;
  for (const auto& f : fires)
  {
    const auto c = geo::cell_of(f.ignition, geo::THUNDER_GRID);
    if (keys.emplace(f.ignition_date, c).second)
    {
      out.push_back({c, f.ignition_date, 2});
    }
  }
  while (out.size() < fires.size() + extra)
  {
    const auto c = geo::cell_of({30.0 + rng.uniform(0, 5), -100.0 + rng.uniform(0, 5)}, geo::THUNDER_GRID);
    const auto d = make_date(2015, 1, 1) + std::chrono::days{static_cast<int>(rng.index(2500))};
    if (keys.emplace(d, c).second)
    {
      out.push_back({c, d, 1});
    }
  }
  return out;
}

void check_dataset_invariants(const Dataset& ds, const std::vector<WildfireEvent>& fires, const LabelingConfig& cfg)
{
  std::size_t pos = 0;
  std::size_t neg = 0;
  std::map<std::string, const WildfireEvent*> by_id;
  for (const auto& f : fires)
  {
    by_id[f.fire_id] = &f;
  }
  for (const auto& s : ds.samples)
  {
    (s.label ? pos : neg)++;
    if (year_of(s.date) == cfg.holdout_year)
    {
      EXPECT_EQ(s.split, Split::holdout);
    }
    else
    {
      EXPECT_NE(s.split, Split::holdout);
    }
    if (s.label)
    {
      ASSERT_TRUE(by_id.contains(s.origin)) << s.origin;
      EXPECT_GE(by_id[s.origin]->duration_days, cfg.min_duration_days);
    }
  }
  EXPECT_EQ(pos, neg);
}
}

TEST(Centroid, UnitSquareAboutOrigin)
{
  const std::vector<geo::GeoPoint> sq{{-0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}, {0.5, -0.5}};
  const auto c = centroid_ignition(sq);
  EXPECT_NEAR(c.point.lat, 0.0, 1e-12);
  EXPECT_NEAR(c.point.lon, 0.0, 1e-12);
  EXPECT_FALSE(c.degenerate);
}

TEST(Centroid, RightTriangle)
{
  const std::vector<geo::GeoPoint> tri{{0, 0}, {0, 3}, {3, 0}};
  const auto c = centroid_ignition(tri);
  EXPECT_NEAR(c.point.lat, 1.0, 1e-9);
  EXPECT_NEAR(c.point.lon, 1.0, 1e-9);
}

TEST(Centroid, TwoPointsThrowAndDegenerateFallsBack)
{
  const std::vector<geo::GeoPoint> two{{0, 0}, {1, 1}};
  EXPECT_THROW(centroid_ignition(two), std::invalid_argument);
  const std::vector<geo::GeoPoint> line{{0, 0}, {1, 1}, {2, 2}};
  const auto c = centroid_ignition(line);
  EXPECT_TRUE(c.degenerate);
  EXPECT_NEAR(c.point.lat, 1.0, 1e-12);
  EXPECT_NEAR(c.point.lon, 1.0, 1e-12);
}

TEST(Centroid, AntimeridianRing)
{
  const std::vector<geo::GeoPoint> sq{{-1, 179}, {1, 179}, {1, -179}, {-1, -179}};
  const auto c = centroid_ignition(sq);
  EXPECT_NEAR(c.point.lat, 0.0, 1e-9);
  EXPECT_NEAR(std::abs(c.point.lon), 180.0, 1e-9);
}

TEST(ClassifyFire, RuleExamples)
{
  const LabelingConfig cfg;
  const std::vector<ThunderRecord> storm{{BASE_CELL, D0, 3}};
  const auto idx = thunder_index(storm);
  EXPECT_EQ(classify_fire(fire_north_of_base(8, D0 + std::chrono::days{3}), idx, cfg), IgnitionCause::lightning);
  EXPECT_EQ(classify_fire(fire_north_of_base(12, D0), idx, cfg), IgnitionCause::anthropogenic);
  EXPECT_EQ(classify_fire(fire_north_of_base(8, D0 + std::chrono::days{8}), idx, cfg), IgnitionCause::anthropogenic);
  EXPECT_EQ(classify_fire(fire_north_of_base(8, D0 + std::chrono::days{7}), idx, cfg), IgnitionCause::lightning);
  EXPECT_EQ(classify_fire(fire_north_of_base(8, D0 - std::chrono::days{1}), idx, cfg), IgnitionCause::anthropogenic);
  EXPECT_EQ(classify_fire(fire_north_of_base(9.999, D0), idx, cfg), IgnitionCause::lightning);
}

TEST(ClassifyFire, MatchesBruteForce)
{
  const LabelingConfig cfg;
  for (std::uint64_t s = 0; s < 10; ++s)
  {
    const auto fx = oracle::random_join_fixture(100 + s, 300, 1500, s % 2 ? 0.6 : 2.0, s % 2 ? 60 : 365);
    const auto idx = thunder_index(fx.thunder);
    for (const auto& f : fx.fires)
    {
      const bool want = oracle::brute_is_lightning(f, fx.thunder, cfg.radius_km, cfg.holdover_days);
      ASSERT_EQ(classify_fire(f, idx, cfg) == IgnitionCause::lightning, want) << f.fire_id;
    }
  }
}

TEST(Negatives, FireNearbySoonAfterIsIneligible)
{
  const LabelingConfig cfg;
  const std::vector<ThunderRecord> storms{{BASE_CELL, D0, 1}, {BASE_CELL, D0 + std::chrono::days{20}, 1}};
  const std::vector<WildfireEvent> fires{fire_north_of_base(5, D0 + std::chrono::days{2})};
  const auto el = eligible_negatives(storms, fire_index(fires), cfg);
  EXPECT_EQ(el, (std::vector<std::size_t>{1}));
}

TEST(Negatives, NoFiresMeansAllEligible)
{
  const LabelingConfig cfg;
  const auto fx = oracle::random_join_fixture(5, 0, 400);
  const auto el = eligible_negatives(fx.thunder, fire_index(fx.fires), cfg);
  EXPECT_EQ(el.size(), fx.thunder.size());
}

TEST(Negatives, EligibilityMatchesBruteForce)
{
  const LabelingConfig cfg;
  const auto fx = oracle::random_join_fixture(6, 500, 2000);
  const auto el = eligible_negatives(fx.thunder, fire_index(fx.fires), cfg);
  const auto want = oracle::brute_eligible(fx.thunder, fx.fires, cfg.radius_km, cfg.holdover_days);
  EXPECT_EQ(el, want);
  EXPECT_GT(want.size(), 0u);
  EXPECT_LT(want.size(), fx.thunder.size());
}

TEST(Negatives, SamplingIsDeterministicDistinctAndEligible)
{
  const LabelingConfig cfg;
  const auto fx = oracle::random_join_fixture(7, 200, 1500);
  const auto f_idx = fire_index(fx.fires);
  const auto el = eligible_negatives(fx.thunder, f_idx, cfg);
  std::set<std::pair<Date, geo::CellId>> eligible;
  for (const auto i : el)
  {
    eligible.emplace(fx.thunder[i].date, fx.thunder[i].cell);
  }
  const auto a = sample_negatives(fx.thunder, f_idx, 100, cfg, 99);
  const auto b = sample_negatives(fx.thunder, f_idx, 100, cfg, 99);
  const auto c = sample_negatives(fx.thunder, f_idx, 100, cfg, 100);
  ASSERT_EQ(a.size(), 100u);
  std::set<std::pair<Date, geo::CellId>> seen;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    EXPECT_EQ(a[i].cell, b[i].cell);
    EXPECT_EQ(a[i].date, b[i].date);
    EXPECT_TRUE(eligible.contains({a[i].date, a[i].cell}));
    EXPECT_TRUE(seen.emplace(a[i].date, a[i].cell).second);
  }
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    differs = differs || a[i].cell != c[i].cell || a[i].date != c[i].date;
  }
  EXPECT_TRUE(differs);
  try
  {
    sample_negatives(fx.thunder, f_idx, el.size() + 1, cfg, 1);
    FAIL() << "expected throw";
  }
  catch (const std::runtime_error& e)
  {
    EXPECT_NE(std::string(e.what()).find("insufficient eligible negatives"), std::string::npos);
  }
}

TEST(BuildDataset, HundredFiresGiveHundredNegatives)
{
  Rng rng(1);
  std::vector<int> years(100, 2018);
  const auto fires = fires_with_years(years, rng);
  const auto thunder = storms_for(fires, 500, rng);
  LabelingConfig cfg;
  cfg.seed = 3;
  const auto ds = build_dataset(fires, thunder, cfg);
  EXPECT_EQ(ds.report.positives, 100u);
  EXPECT_EQ(ds.report.negatives, 100u);
  EXPECT_EQ(ds.samples.size(), 200u);
  check_dataset_invariants(ds, fires, cfg);
  std::size_t test = 0;
  for (const auto& s : ds.samples)
  {
    test += s.split == Split::test ? 1 : 0;
  }
  EXPECT_GT(test, 15u);
  EXPECT_LT(test, 70u);
}

TEST(BuildDataset, AllFiresInHoldoutYearLeaveTrainingEmpty)
{
  Rng rng(2);
  const auto fires = fires_with_years(std::vector<int>(30, 2021), rng);
  auto thunder = storms_for(fires, 0, rng);
  for (std::size_t i = 0; i < 60; ++i)
  {
    thunder.push_back({geo::CellId{2500, static_cast<std::int32_t>(100 + i)}, make_date(2021, 8, 1), 1});
  }
  const LabelingConfig cfg;
  const auto ds = build_dataset(fires, thunder, cfg);
  EXPECT_EQ(ds.report.train, 0u);
  EXPECT_FALSE(ds.report.warnings.empty());
  check_dataset_invariants(ds, fires, cfg);
}

TEST(BuildDataset, DurationFilterAndDeterminism)
{
  Rng rng(4);
  auto fires = fires_with_years({2016, 2017, 2018, 2019, 2020, 2021, 2016, 2017, 2018, 2019}, rng);
  fires[0].duration_days = 1;
  fires[5].duration_days = 1;
  const auto thunder = storms_for(fires, 300, rng);
  LabelingConfig cfg;
  cfg.seed = 17;
  const auto a = build_dataset(fires, thunder, cfg);
  const auto b = build_dataset(fires, thunder, cfg);
  EXPECT_EQ(a.report.short_fires, 2u);
  EXPECT_EQ(a.report.positives, 8u);
  EXPECT_EQ(write_labeled(a.samples), write_labeled(b.samples));
  for (const auto& s : a.samples)
  {
    EXPECT_NE(s.origin, "y0");
    EXPECT_NE(s.origin, "y5");
  }
  check_dataset_invariants(a, fires, cfg);
}

TEST(BuildDataset, AnthropogenicUsesQuietAnchors)
{
  Rng rng(8);
  auto fires = fires_with_years(std::vector<int>(20, 2018), rng);
  // storms for the first half only, so the rest are human-caused
  const std::vector<WildfireEvent> lit(fires.begin(), fires.begin() + 10);
  auto thunder = storms_for(lit, 50, rng);
  ingest::WeatherTable weather([&] {
    std::vector<ingest::WeatherDay> days;
    for (const auto& cell : {geo::cell_of({45.0, 9.0}, geo::WEATHER_GRID), geo::cell_of({46.0, 11.0}, geo::WEATHER_GRID)})
    {
      for (int d = 0; d < 400; ++d)
      {
        ingest::WeatherDay w;
        w.cell = cell;
        w.date = make_date(2018, 1, 1) + std::chrono::days{d};
        days.push_back(w);
      }
    }
    return days;
  }());
  const auto domain = domain_of(weather, 90);
  EXPECT_EQ(domain.first, make_date(2018, 1, 1) + std::chrono::days{90});
  LabelingConfig cfg;
  cfg.seed = 5;
  EXPECT_THROW(build_dataset(fires, thunder, cfg, DatasetKind::anthropogenic), std::invalid_argument);
  const auto ds = build_dataset(fires, thunder, cfg, DatasetKind::anthropogenic, &domain);
  EXPECT_EQ(ds.report.anthropogenic, 10u);
  EXPECT_EQ(ds.report.positives, 10u);
  check_dataset_invariants(ds, fires, cfg);
  const auto t_idx = thunder_index(thunder);
  const auto f_idx = fire_index(fires);
  for (const auto& s : ds.samples)
  {
    if (s.label)
    {
      EXPECT_GE(std::stoi(s.origin.substr(1)), 10);
      continue;
    }
    EXPECT_EQ(s.origin.rfind("quiet:", 0), 0u);
    EXPECT_FALSE(t_idx.any_within(s.anchor, cfg.radius_km, s.date - std::chrono::days{cfg.holdover_days}, s.date));
    EXPECT_FALSE(f_idx.any_within(s.anchor, cfg.radius_km, s.date, s.date + std::chrono::days{cfg.holdover_days}));
  }
}

TEST(Splits, YearModeKeepsYearsTogether)
{
  Rng rng(9);
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 400; ++i)
  {
    LabeledSample s;
    s.date = make_date(2014 + static_cast<int>(rng.index(9)), 5, 1);
    samples.push_back(s);
  }
  LabelingConfig cfg;
  cfg.split_mode = SplitMode::year;
  assign_splits(samples, cfg);
  std::map<int, std::set<Split>> tags;
  for (const auto& s : samples)
  {
    tags[year_of(s.date)].insert(s.split);
  }
  std::size_t test_years = 0;
  for (const auto& [y, t] : tags)
  {
    EXPECT_EQ(t.size(), 1u) << y;
    test_years += t.contains(Split::test) ? 1 : 0;
  }
  EXPECT_EQ(*tags[2021].begin(), Split::holdout);
  EXPECT_GE(test_years, 1u);
}

TEST(Labeled, RoundTripAndConfigValidation)
{
  Rng rng(10);
  const auto fires = fires_with_years(std::vector<int>(15, 2019), rng);
  const auto thunder = storms_for(fires, 100, rng);
  const auto ds = build_dataset(fires, thunder, LabelingConfig{});
  const auto text = write_labeled(ds.samples);
  EXPECT_EQ(write_labeled(parse_labeled(csv::Table::parse(text))), text);
  LabelingConfig bad;
  bad.radius_km = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = {};
  bad.holdover_days = -1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(parse_split("validation"), std::invalid_argument);
}
