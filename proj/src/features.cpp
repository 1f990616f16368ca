#include "lightfire/features.h"
#include "lightfire/util.h"
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lightfire::features
{
namespace
{
std::string cell_text(const geo::CellId& c)
{
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}
template <class Range>
void append_names(std::vector<std::string>& out, const Range& r)
{
  for (const auto* n : r)
  {
    out.emplace_back(n);
  }
}
std::vector<std::optional<fwi::DayIndices>> roll_cell(const std::vector<ingest::WeatherDay>& series,
                                                      const fwi::LatitudeBand band)
{
  std::vector<std::optional<fwi::DayIndices>> out(series.size());
  fwi::FwiState state;
  for (std::size_t i = 0; i < series.size(); ++i)
  {
    const auto& w = series[i];
    if (!w.t_c || !w.rh_pct || !w.prec_mm || !w.wind_u_ms || !w.wind_v_ms)
    {
      // incomplete day: indices undefined, state carried unchanged
      continue;
    }
    const fwi::DailyWeather wx{
      *w.t_c, *w.rh_pct, std::hypot(*w.wind_u_ms, *w.wind_v_ms) * 3.6, *w.prec_mm, month_of(w.date), band};
    const auto r = fwi::step(state, wx);
    state = r.state;
    out[i] = fwi::DayIndices{r.state, r.outputs};
  }
  return out;
}
}
void FeatureSetConfig::validate() const
{
  if (!include_vma && !include_history && !include_fwi && !include_spatiotemporal)
  {
    throw std::invalid_argument("feature set must enable at least one group");
  }
}
FeatureSetConfig FeatureSetConfig::model(const int index)
{
  switch (index)
  {
    case 1:
      return {true, false, false, false};
    case 2:
      return {true, true, false, false};
    case 3:
      return {true, false, true, false};
    case 4:
      return {true, true, true, false};
    case 5:
      return {true, true, true, true};
    default:
      throw std::invalid_argument("feature set must be 1..5, got " + std::to_string(index));
  }
}
std::vector<std::string> column_names(const FeatureSetConfig& cfg)
{
  cfg.validate();
  std::vector<std::string> out;
  if (cfg.include_vma)
  {
    append_names(out, VMA_COLUMNS);
  }
  if (cfg.include_history)
  {
    append_names(out, HISTORY_COLUMNS);
  }
  if (cfg.include_fwi)
  {
    append_names(out, FWI_COLUMNS);
  }
  if (cfg.include_spatiotemporal)
  {
    append_names(out, SPATIOTEMPORAL_COLUMNS);
  }
  return out;
}
int days_since_prec(const std::span<const double> daily_prec, const int window, const double wet_day_mm)
{
  if (window < 1 || daily_prec.size() < static_cast<std::size_t>(window))
  {
    throw std::invalid_argument("insufficient history");
  }
  const auto n = daily_prec.size();
  for (int k = 0; k < window; ++k)
  {
    if (daily_prec[n - 1 - static_cast<std::size_t>(k)] >= wet_day_mm)
    {
      return k;
    }
  }
  return window;
}
double monthly_prec(const std::span<const double> prior, const int days)
{
  if (days < 1 || prior.size() < static_cast<std::size_t>(days))
  {
    throw std::invalid_argument("insufficient history");
  }
  double sum = 0.0;
  for (std::size_t i = prior.size() - static_cast<std::size_t>(days); i < prior.size(); ++i)
  {
    sum += prior[i];
  }
  return sum / days;
}
Wind wind_decompose(const double u, const double v)
{
  Wind w;
  w.speed = std::hypot(u, v);
  if (u == 0.0 && v == 0.0)
  {
    w.calm = true;
    return w;
  }
  double deg = std::atan2(u, v) * 180.0 / std::numbers::pi;
  if (deg < 0.0)
  {
    deg += 360.0;
  }
  w.direction_deg = deg >= 360.0 ? 0.0 : deg;
  return w;
}
Assembler::Assembler(const Tables& tables, const FeatureSetConfig cfg) : Assembler(tables, cfg, Options{}) { }
Assembler::Assembler(const Tables& tables, const FeatureSetConfig cfg, const Options options)
  : tables_(tables), cfg_(cfg), options_(options), names_(column_names(cfg))
{
  if (tables_.weather == nullptr || tables_.statics == nullptr)
  {
    throw std::invalid_argument("assembler needs weather and static tables");
  }
  std::vector<geo::CellId> keys;
  for (const auto& [cell, series] : tables_.weather->cells())
  {
    keys.push_back(cell);
  }
  const bool compute_fwi = cfg_.include_fwi && (tables_.fwi == nullptr || options_.shift_fwi);
  std::vector<CellCache> built(keys.size());
  std::vector<std::size_t> clamp_counts(keys.size(), 0);
  parallel_for(keys.size(), [&](const std::size_t i) {
    auto& cc = built[i];
    cc.weather = *tables_.weather->series(keys[i]);
    if (options_.shifts != nullptr)
    {
      const auto it = options_.shifts->find(keys[i]);
      if (it != options_.shifts->end() && !it->second.is_zero())
      {
        for (auto& w : cc.weather)
        {
          if (w.rh_pct)
          {
            const double x = *w.rh_pct + it->second.rh;
            w.rh_pct = std::clamp(x, 0.0, 100.0);
            clamp_counts[i] += *w.rh_pct != x;
          }
          if (w.t_c)
          {
            w.t_c = *w.t_c + it->second.t;
          }
          if (w.prec_mm)
          {
            const double x = *w.prec_mm + it->second.prec;
            w.prec_mm = std::max(x, 0.0);
            clamp_counts[i] += *w.prec_mm != x;
          }
        }
      }
    }
    if (compute_fwi)
    {
      const auto band = fwi::band_for_latitude(geo::WEATHER_GRID.center(keys[i]).lat);
      cc.indices = roll_cell(options_.shift_fwi ? cc.weather : *tables_.weather->series(keys[i]), band);
    }
  });
  for (std::size_t i = 0; i < keys.size(); ++i)
  {
    clamped_ += clamp_counts[i];
    cache_.emplace(keys[i], std::move(built[i]));
  }
}
const Assembler::CellCache* Assembler::cache(const geo::CellId& c) const
{
  const auto it = cache_.find(c);
  return it == cache_.end() ? nullptr : &it->second;
}
FeatureRow Assembler::assemble(const labeler::LabeledSample& sample) const
{
  const auto wc = geo::cell_of(sample.anchor, geo::WEATHER_GRID);
  const auto* cc = cache(wc);
  const auto st = tables_.statics->find(wc);
  if (cc == nullptr || st == tables_.statics->end())
  {
    throw std::runtime_error("cell not covered: weather cell " + cell_text(wc));
  }
  const auto pos = tables_.weather->position(wc, sample.date);
  if (!pos)
  {
    throw std::runtime_error("date gap: no weather for " + format_date(sample.date) + " in cell " + cell_text(wc));
  }
  const auto& original = *tables_.weather->series(wc);
  const auto& shifted = cc->weather;
  const auto& day = shifted[*pos];
  const auto need = static_cast<std::size_t>(std::max(options_.lags.dry_window_days, options_.lags.month_days + 1));
  const bool has_history = *pos + 1 >= need
                        && original[*pos + 1 - need].date == sample.date - std::chrono::days{static_cast<long>(need - 1)};
  if (cfg_.include_vma && !has_history)
  {
    throw std::runtime_error("date gap: fewer than " + std::to_string(need) + " contiguous days before "
                             + format_date(sample.date) + " in cell " + cell_text(wc));
  }
  const auto month = month_of(sample.date);
  FeatureRow row;
  row.label = sample.label;
  row.split = sample.split;
  row.date = sample.date;
  row.anchor = sample.anchor;
  row.values.reserve(names_.size());
  if (cfg_.include_vma)
  {
    const auto& lag_src = options_.shift_lagged ? shifted : original;
    std::vector<double> prec;
    prec.reserve(need);
    bool prec_ok = true;
    for (std::size_t i = *pos + 1 - need; i <= *pos; ++i)
    {
      if (!lag_src[i].prec_mm)
      {
        prec_ok = false;
        break;
      }
      prec.push_back(*lag_src[i].prec_mm);
    }
    std::optional<double> dsp;
    std::optional<double> mp;
    if (prec_ok)
    {
      dsp = days_since_prec(prec, options_.lags.dry_window_days, options_.lags.wet_day_mm);
      mp = monthly_prec(std::span<const double>(prec).first(prec.size() - 1), options_.lags.month_days);
    }
    std::optional<double> v_total;
    std::optional<double> v_dir;
    if (day.wind_u_ms && day.wind_v_ms)
    {
      const auto w = wind_decompose(*day.wind_u_ms, *day.wind_v_ms);
      v_total = w.speed;
      v_dir = w.direction_deg;
    }
    const auto& s = st->second;
    row.values.insert(row.values.end(),
                      {day.rh_pct,
                       day.t_c,
                       day.prec_mm,
                       dsp,
                       mp,
                       v_total,
                       v_dir,
                       s.low_veg,
                       s.high_veg,
                       s.ndvi_by_month[static_cast<std::size_t>(month - 1)],
                       day.sm,
                       day.water_mm,
                       s.pop});
  }
  if (cfg_.include_history)
  {
    row.values.push_back(st->second.historical_fires);
  }
  if (cfg_.include_fwi)
  {
    const bool use_table = tables_.fwi != nullptr && !options_.shift_fwi;
    if (use_table)
    {
      const auto fpos = tables_.fwi->position(wc, sample.date);
      if (fpos)
      {
        const auto& f = (*tables_.fwi->series(wc))[*fpos];
        row.values.insert(row.values.end(), {f.fwi, f.bui, f.dc, f.dmc, f.ffmc, f.isi});
      }
      else
      {
        row.values.insert(row.values.end(), 6, std::nullopt);
      }
    }
    else if (const auto& ix = cc->indices[*pos])
    {
      row.values.insert(row.values.end(),
                        {ix->derived.fwi, ix->derived.bui, ix->codes.dc, ix->codes.dmc, ix->codes.ffmc, ix->derived.isi});
    }
    else
    {
      row.values.insert(row.values.end(), 6, std::nullopt);
    }
  }
  if (cfg_.include_spatiotemporal)
  {
    row.values.push_back(sample.anchor.lat);
    row.values.push_back(sample.anchor.lon);
    for (int m = 1; m <= 12; ++m)
    {
      row.values.push_back(m == month ? 1.0 : 0.0);
    }
  }
  return row;
}
std::vector<FeatureRow> assemble_all(const Assembler& assembler, const std::span<const labeler::LabeledSample> samples)
{
  std::vector<FeatureRow> rows(samples.size());
  std::vector<std::string> errors(samples.size());
  parallel_for(samples.size(), [&](const std::size_t i) {
    try
    {
      rows[i] = assembler.assemble(samples[i]);
    }
    catch (const std::exception& e)
    {
      errors[i] = e.what();
    }
  });
  for (const auto& e : errors)
  {
    if (!e.empty())
    {
      throw std::runtime_error(e);
    }
  }
  return rows;
}
std::size_t rebalance(std::vector<FeatureRow>& rows, const std::uint64_t seed)
{
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    (rows[i].label ? pos : neg).push_back(i);
  }
  auto& larger = pos.size() > neg.size() ? pos : neg;
  const auto surplus = std::max(pos.size(), neg.size()) - std::min(pos.size(), neg.size());
  if (surplus == 0)
  {
    return 0;
  }
  Rng rng(seed);
  std::vector<char> drop(rows.size(), 0);
  for (const auto k : sample_without_replacement(larger.size(), surplus, rng))
  {
    drop[larger[k]] = 1;
  }
  std::vector<FeatureRow> kept;
  kept.reserve(rows.size() - surplus);
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    if (drop[i] == 0)
    {
      kept.push_back(std::move(rows[i]));
    }
  }
  rows = std::move(kept);
  return surplus;
}
std::string write_features(const FeatureTable& table)
{
  std::vector<std::string> header{"date", "anchor_lat", "anchor_lon"};
  header.insert(header.end(), table.names.begin(), table.names.end());
  header.emplace_back("label");
  header.emplace_back("split");
  csv::Writer w(header);
  for (const auto& r : table.rows)
  {
    w.field(format_date(r.date)).field(r.anchor.lat).field(r.anchor.lon);
    for (const auto& v : r.values)
    {
      w.field(v);
    }
    w.field(r.label ? 1 : 0).field(labeler::split_name(r.split));
    w.end_row();
  }
  return w.str();
}
FeatureTable parse_features(const csv::Table& t)
{
  const auto& h = t.header();
  if (h.size() < 6 || h[0] != "date" || h[1] != "anchor_lat" || h[2] != "anchor_lon" || h[h.size() - 2] != "label"
      || h.back() != "split")
  {
    throw std::runtime_error(t.source() + ": not a feature table (expected date,anchor_lat,anchor_lon,...,label,split)");
  }
  FeatureTable out;
  out.names.assign(h.begin() + 3, h.end() - 2);
  out.rows.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r)
  {
    FeatureRow row;
    try
    {
      row.date = parse_date(t.at(r, 0));
      row.split = labeler::parse_split(t.at(r, h.size() - 1));
    }
    catch (const std::invalid_argument& e)
    {
      throw std::runtime_error(t.source() + ": " + e.what() + " at row " + std::to_string(r + 1));
    }
    row.anchor = geo::make_point(csv::parse_double(t.at(r, 1), "anchor_lat", r + 1),
                                 csv::parse_double(t.at(r, 2), "anchor_lon", r + 1));
    for (std::size_t c = 3; c + 2 < h.size(); ++c)
    {
      row.values.push_back(csv::parse_optional(t.at(r, c), h[c], r + 1));
    }
    row.label = csv::parse_int(t.at(r, h.size() - 2), "label", r + 1) == 1;
    out.rows.push_back(std::move(row));
  }
  return out;
}
FeatureTable read_features(const std::filesystem::path& path)
{
  return parse_features(csv::Table::read(path));
}
std::vector<std::vector<double>> columns_of(const FeatureTable& table, const bool append_label)
{
  std::vector<std::vector<double>> cols(table.names.size() + (append_label ? 1 : 0));
  for (auto& c : cols)
  {
    c.reserve(table.rows.size());
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r)
  {
    const auto& row = table.rows[r];
    for (std::size_t j = 0; j < table.names.size(); ++j)
    {
      if (!row.values[j])
      {
        throw std::runtime_error("missing value in column " + table.names[j] + " at row " + std::to_string(r + 1));
      }
      cols[j].push_back(*row.values[j]);
    }
    if (append_label)
    {
      cols.back().push_back(row.label ? 1.0 : 0.0);
    }
  }
  return cols;
}
CorrelationMatrix pearson_matrix(const std::span<const std::vector<double>> columns, std::vector<std::string> names)
{
  if (names.size() != columns.size())
  {
    throw std::invalid_argument("column names and columns differ in count");
  }
  const auto n = columns.empty() ? 0 : columns.front().size();
  if (n < 2)
  {
    throw std::invalid_argument("pearson_matrix needs at least 2 rows");
  }
  for (const auto& c : columns)
  {
    if (c.size() != n)
    {
      throw std::invalid_argument("columns differ in length");
    }
  }
  const auto d = columns.size();
  std::vector<std::vector<double>> centered(d);
  std::vector<double> ss(d, 0.0);
  for (std::size_t j = 0; j < d; ++j)
  {
    double mean = 0.0;
    for (const double x : columns[j])
    {
      mean += x;
    }
    mean /= static_cast<double>(n);
    centered[j].resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
      centered[j][i] = columns[j][i] - mean;
      ss[j] += centered[j][i] * centered[j][i];
    }
  }
  CorrelationMatrix m;
  m.names = std::move(names);
  m.r.assign(d * d, std::nullopt);
  for (std::size_t a = 0; a < d; ++a)
  {
    if (!(ss[a] > 0.0))
    {
      continue;
    }
    m.r[a * d + a] = 1.0;
    for (std::size_t b = a + 1; b < d; ++b)
    {
      if (!(ss[b] > 0.0))
      {
        continue;
      }
      double sxy = 0.0;
      for (std::size_t i = 0; i < n; ++i)
      {
        sxy += centered[a][i] * centered[b][i];
      }
      const double r = std::clamp(sxy / std::sqrt(ss[a] * ss[b]), -1.0, 1.0);
      m.r[a * d + b] = r;
      m.r[b * d + a] = r;
    }
  }
  return m;
}
std::string write_correlation(const CorrelationMatrix& m)
{
  std::vector<std::string> header{"feature"};
  header.insert(header.end(), m.names.begin(), m.names.end());
  csv::Writer w(header);
  for (std::size_t i = 0; i < m.names.size(); ++i)
  {
    w.field(m.names[i]);
    for (std::size_t j = 0; j < m.names.size(); ++j)
    {
      w.field(m.at(i, j));
    }
    w.end_row();
  }
  return w.str();
}
std::vector<Histogram> class_histograms(const std::span<const std::vector<double>> columns,
                                        const std::span<const std::string> names,
                                        const std::span<const std::uint8_t> labels,
                                        const int bins)
{
  if (bins < 1)
  {
    throw std::invalid_argument("bins must be positive");
  }
  std::vector<Histogram> out;
  for (std::size_t j = 0; j < columns.size(); ++j)
  {
    const auto& col = columns[j];
    if (col.size() != labels.size())
    {
      throw std::invalid_argument("column and label lengths differ");
    }
    Histogram h;
    h.feature = names[j];
    h.positive.assign(static_cast<std::size_t>(bins), 0);
    h.negative.assign(static_cast<std::size_t>(bins), 0);
    if (col.empty())
    {
      h.edges.assign(static_cast<std::size_t>(bins) + 1, 0.0);
      out.push_back(std::move(h));
      continue;
    }
    const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi - lo) / bins;
    for (int b = 0; b <= bins; ++b)
    {
      h.edges.push_back(b == bins ? hi : lo + width * b);
    }
    for (std::size_t i = 0; i < col.size(); ++i)
    {
      std::size_t b = 0;
      if (width > 0.0)
      {
        b = std::min(static_cast<std::size_t>((col[i] - lo) / width), static_cast<std::size_t>(bins - 1));
      }
      (labels[i] ? h.positive : h.negative)[b]++;
    }
    out.push_back(std::move(h));
  }
  return out;
}
std::string write_histograms(const std::span<const Histogram> hists)
{
  csv::Writer w({"feature", "bin", "lower", "upper", "count_ignition", "count_no_ignition"});
  for (const auto& h : hists)
  {
    for (std::size_t b = 0; b < h.positive.size(); ++b)
    {
      w.field(h.feature)
        .field(static_cast<long>(b))
        .field(h.edges[b])
        .field(h.edges[b + 1])
        .field(static_cast<long>(h.positive[b]))
        .field(static_cast<long>(h.negative[b]));
      w.end_row();
    }
  }
  return w.str();
}
}
