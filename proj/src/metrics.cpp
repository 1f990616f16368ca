#include "lightfire/models.h"
#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace lightfire::models
{
MetricsReport metrics_from_confusion(const Confusion& c)
{
  MetricsReport r;
  r.confusion = c;
  r.n = c.tp + c.fp + c.fn + c.tn;
  const auto d = [](const std::size_t a, const std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  r.accuracy = d(c.tp + c.tn, r.n);
  r.precision = d(c.tp, c.tp + c.fp);
  r.recall = d(c.tp, c.tp + c.fn);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::optional<double> roc_auc(const std::span<const double> scores, const std::span<const std::uint8_t> y)
{
  if (scores.size() != y.size())
  {
    throw std::invalid_argument("roc_auc: score and label counts differ");
  }
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](const std::size_t a, const std::size_t b) {
    return scores[a] < scores[b];
  });
  double pos_ranks = 0.0;
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n;)
  {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]])
    {
      ++j;
    }
    // ranks i+1 .. j share their average
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
    {
      if (y[order[k]])
      {
        pos_ranks += avg;
        ++n1;
      }
    }
    i = j;
  }
  const auto n0 = n - n1;
  if (n1 == 0 || n0 == 0)
  {
    return std::nullopt;
  }
  const double u = pos_ranks - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
  return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

MetricsReport evaluate(const std::span<const double> prob, const std::span<const std::uint8_t> y)
{
  if (prob.size() != y.size())
  {
    throw std::invalid_argument("evaluate: prediction and label counts differ");
  }
  if (prob.empty())
  {
    throw std::invalid_argument("evaluate: empty test set");
  }
  Confusion c;
  for (std::size_t i = 0; i < prob.size(); ++i)
  {
    const bool hit = prob[i] >= 0.5;
    if (y[i])
    {
      ++(hit ? c.tp : c.fn);
    }
    else
    {
      ++(hit ? c.fp : c.tn);
    }
  }
  auto r = metrics_from_confusion(c);
  r.roc_auc = roc_auc(prob, y);
  return r;
}

MetricsReport evaluate(const Model& m, const DesignMatrix& X)
{
  const auto p = m.predict_all(X);
  return evaluate(p, X.y);
}
}
