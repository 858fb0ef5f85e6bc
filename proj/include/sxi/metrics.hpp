#ifndef SXI_METRICS_HPP
#define SXI_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "sxi/common.hpp"

namespace sxi {

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
};

inline ConfusionMatrix confusion(const std::vector<int>& pred,
                                 const std::vector<int>& labels) {
  if (pred.size() != labels.size())
    throw DataError("confusion: length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (labels[i])
      pred[i] ? ++cm.tp : ++cm.fn;
    else
      pred[i] ? ++cm.fp : ++cm.tn;
  }
  return cm;
}

// Undefined ratios (zero denominators) are reported as absent, never as 0.
struct ClassificationMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;  // TP/(TP+FP)
  std::optional<double> recall;     // TP/(TP+FN), a.k.a. TPR/sensitivity
  std::optional<double> npv;        // TN/(TN+FN)
  std::optional<double> fpr;        // FP/(FP+TN)
};

inline ClassificationMetrics classification_metrics(
    const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("metrics: empty confusion matrix");
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / cm.total();
  if (cm.tp + cm.fp > 0)
    m.precision = static_cast<double>(cm.tp) / (cm.tp + cm.fp);
  if (cm.tp + cm.fn > 0)
    m.recall = static_cast<double>(cm.tp) / (cm.tp + cm.fn);
  if (cm.tn + cm.fn > 0)
    m.npv = static_cast<double>(cm.tn) / (cm.tn + cm.fn);
  if (cm.fp + cm.tn > 0)
    m.fpr = static_cast<double>(cm.fp) / (cm.fp + cm.tn);
  return m;
}

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (FPR, TPR), ends pinned
  double auc = 0.0;
};

// Threshold sweep at every distinct score (descending, ties share a
// threshold) with trapezoidal area.
inline RocCurve roc_auc(const std::vector<double>& scores,
                        const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DataError("roc: length mismatch");
  std::size_t n_pos = std::count(labels.begin(), labels.end(), 1);
  std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("roc: both classes required");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    double v = scores[order[k]];
    while (k < order.size() && scores[order[k]] == v) {
      labels[order[k]] ? ++tp : ++fp;
      ++k;
    }
    curve.points.emplace_back(static_cast<double>(fp) / n_neg,
                              static_cast<double>(tp) / n_pos);
  }
  if (curve.points.back() != std::make_pair(1.0, 1.0))
    curve.points.emplace_back(1.0, 1.0);

  double auc = 0.0;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    auto [fpr0, tpr0] = curve.points[i];
    auto [fpr1, tpr1] = curve.points[i + 1];
    auc += 0.5 * (tpr1 + tpr0) * (fpr1 - fpr0);
  }
  curve.auc = auc;
  return curve;
}

using MetricFn = std::function<double(const std::vector<double>&,
                                      const std::vector<int>&)>;

// Percentile bootstrap over row resampling. Resamples where the metric is
// undefined (e.g. a single-class AUC draw) are skipped.
inline std::pair<double, double> bootstrap_ci(const MetricFn& metric,
                                              const std::vector<double>& scores,
                                              const std::vector<int>& labels,
                                              int n_boot, double level,
                                              std::uint64_t seed) {
  if (n_boot < 100) throw DataError("bootstrap: n_boot must be >= 100");
  if (level <= 0.0 || level >= 1.0)
    throw DataError("bootstrap: level must be in (0,1)");
  std::size_t n = scores.size();
  std::vector<double> stats;
  stats.reserve(n_boot);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (int b = 0; b < n_boot; ++b) {
    Rng rng(derive_seed(seed, "bootstrap", static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = pick(rng);
      s[i] = scores[r];
      y[i] = labels[r];
    }
    try {
      double v = metric(s, y);
      if (std::isfinite(v)) stats.push_back(v);
    } catch (const DataError&) {
      // undefined on this resample
    }
  }
  if (stats.empty()) throw DataError("bootstrap: metric undefined everywhere");
  std::sort(stats.begin(), stats.end());
  auto percentile = [&](double q) {
    double pos = q * (stats.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, stats.size() - 1);
    double frac = pos - lo;
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  double tail = (1.0 - level) / 2.0;
  return {percentile(tail), percentile(1.0 - tail)};
}

}  // namespace sxi

#endif  // SXI_METRICS_HPP
