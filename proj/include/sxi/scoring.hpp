#ifndef SXI_SCORING_HPP
#define SXI_SCORING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sxi/data.hpp"
#include "sxi/lasso.hpp"

namespace sxi {

// Pearson correlation; a constant vector correlates 0 with everything.
inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  std::size_t n = a.size();
  if (n == 0 || b.size() != n) throw InternalError("pearson: length mismatch");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

enum class Direction { positive, negative };

struct NormalizationEntry {
  double min = 0.0;
  double max = 0.0;
  Direction direction = Direction::positive;
};

// Correlation-signed min-max transform. The transform itself uses only max;
// min is carried for remap bookkeeping and artifact audit.
struct NormalizationMap {
  std::vector<std::string> feature_names;
  std::vector<NormalizationEntry> entries;

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline NormalizationMap fit_normalization(const DataTable& train) {
  auto y = train.labels();
  std::vector<double> yd(y.begin(), y.end());
  NormalizationMap map;
  for (int j : train.feature_indices()) {
    const Column& c = train.columns[j];
    NormalizationEntry e;
    e.min = *std::min_element(c.values.begin(), c.values.end());
    e.max = *std::max_element(c.values.begin(), c.values.end());
    e.direction = pearson(c.values, yd) >= 0.0 ? Direction::positive
                                               : Direction::negative;
    map.feature_names.push_back(c.name);
    map.entries.push_back(e);
  }
  return map;
}

inline double normalize_value(double x, const NormalizationEntry& e) {
  if (e.max == 0.0 || e.min == e.max) return 0.0;
  double v = e.direction == Direction::positive ? x / e.max
                                                : (e.max - x) / e.max;
  return std::clamp(v, 0.0, 1.0);
}

inline DataTable normalize(const DataTable& table,
                           const NormalizationMap& map) {
  DataTable out = table;
  for (int j : out.feature_indices()) {
    Column& c = out.columns[j];
    int m = map.index_of(c.name);
    if (m < 0) throw DataError("feature missing from normalization map: " +
                               c.name);
    const NormalizationEntry& e = map.entries[m];
    for (double& v : c.values) v = normalize_value(v, e);
  }
  return out;
}

struct BivariateWeights {
  std::vector<std::string> feature_names;
  std::vector<double> weights;  // mean |corr| with the other features
};

inline BivariateWeights bivariate_weights(const DataTable& normalized_train) {
  auto idx = normalized_train.feature_indices();
  if (idx.empty()) throw DataError("no feature columns");
  BivariateWeights bw;
  std::size_t d = idx.size();
  for (int j : idx) bw.feature_names.push_back(normalized_train.columns[j].name);
  bw.weights.assign(d, 1.0);
  if (d == 1) return bw;  // single feature: weight 1 by convention

  std::vector<std::vector<double>> corr(d, std::vector<double>(d, 0.0));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) {
      double r = pearson(normalized_train.columns[idx[a]].values,
                         normalized_train.columns[idx[b]].values);
      corr[a][b] = corr[b][a] = r;
    }
  for (std::size_t a = 0; a < d; ++a) {
    double sum = 0.0;
    for (std::size_t b = 0; b < d; ++b)
      if (b != a) sum += std::abs(corr[a][b]);
    bw.weights[a] = sum / static_cast<double>(d - 1);
  }
  return bw;
}

struct ScoreSet {
  std::vector<double> scores;
  double benchmark = 0.0;           // arithmetic mean of scores
  std::vector<int> flags;           // 1 iff orientation*(score-benchmark) >= 0
  int orientation = +1;
  std::optional<double> delineation_accuracy;  // only when labels given
};

// Weighted-mean SXI++ score per row plus benchmark, flags, and (when labels
// are given) the orientation sign and delineation accuracy.
inline ScoreSet compute_scores(const DataTable& normalized,
                               const std::vector<double>& weights,
                               const std::vector<int>* labels = nullptr) {
  auto idx = normalized.feature_indices();
  if (weights.size() != idx.size())
    throw DataError("weight vector not aligned with modeled features");
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DataError("weights must be nonnegative");
    wsum += w;
  }
  if (wsum == 0.0) throw DataError("all-zero weight vector");

  std::size_t n = normalized.n_rows();
  ScoreSet set;
  set.scores.assign(n, 0.0);
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const auto& col = normalized.columns[idx[j]].values;
    double w = weights[j] / wsum;
    for (std::size_t i = 0; i < n; ++i) set.scores[i] += w * col[i];
  }
  double mean = 0.0;
  for (double s : set.scores) mean += s;
  set.benchmark = n ? mean / static_cast<double>(n) : 0.0;

  if (labels) {
    if (labels->size() != n) throw DataError("label length mismatch");
    std::vector<double> yd(labels->begin(), labels->end());
    double r = pearson(set.scores, yd);
    set.orientation = r < 0.0 ? -1 : +1;
  }
  set.flags.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    set.flags[i] =
        set.orientation * (set.scores[i] - set.benchmark) >= 0.0 ? 1 : 0;
  if (labels) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (set.flags[i] == (*labels)[i]) ++agree;
    set.delineation_accuracy = n ? static_cast<double>(agree) / n : 0.0;
  }
  return set;
}

struct RemapResult {
  NormalizationMap map;
  bool no_flagged_rows = false;  // warning: remap was a no-op
  std::vector<double> coefficients;
};

// Lasso of flags on normalized features decides which map entries move:
// positive coefficients pull max down to the flag=1 subgroup's raw maximum,
// negative coefficients pull min up to that subgroup's raw minimum.
inline RemapResult lasso_remap(const DataTable& train_raw,
                               const DataTable& normalized,
                               const std::vector<int>& flags,
                               const NormalizationMap& map, double lambda,
                               double coef_tol = 1e-8) {
  RemapResult res;
  res.map = map;
  auto idx = normalized.feature_indices();
  std::size_t n = normalized.n_rows();
  if (flags.size() != n) throw DataError("flag length mismatch");

  bool any_flagged =
      std::find(flags.begin(), flags.end(), 1) != flags.end();
  if (!any_flagged) {
    res.no_flagged_rows = true;
    res.coefficients.assign(idx.size(), 0.0);
    return res;
  }

  std::vector<std::vector<double>> X(n, std::vector<double>(idx.size()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      X[i][j] = normalized.columns[idx[j]].values[i];
  std::vector<double> y(flags.begin(), flags.end());
  LassoFit fit = fit_lasso(X, y, lambda);
  res.coefficients = fit.coefficients;

  for (std::size_t j = 0; j < idx.size(); ++j) {
    double beta = fit.coefficients[j];
    if (std::abs(beta) <= coef_tol) continue;
    const Column& raw = train_raw.columns[idx[j]];
    int m = res.map.index_of(raw.name);
    if (m < 0) throw DataError("feature missing from normalization map: " +
                               raw.name);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
      if (flags[i] == 1) {
        lo = std::min(lo, raw.values[i]);
        hi = std::max(hi, raw.values[i]);
      }
    if (beta > 0.0)
      res.map.entries[m].max = hi;
    else
      res.map.entries[m].min = lo;
    if (res.map.entries[m].min > res.map.entries[m].max)
      std::swap(res.map.entries[m].min, res.map.entries[m].max);
  }
  return res;
}

struct BenchmarkReport {
  double benchmark = 0.0;
  double positive_pct = 0.0;
  double negative_pct = 0.0;
  // SXI++ distribution w.r.t. outcomes: counts at/above vs below benchmark,
  // broken out by label.
  std::size_t above_positive = 0, above_negative = 0;
  std::size_t below_positive = 0, below_negative = 0;
};

inline BenchmarkReport benchmark_report(const ScoreSet& scores,
                                        const std::vector<int>& labels) {
  if (labels.size() != scores.scores.size())
    throw DataError("label length mismatch");
  BenchmarkReport rep;
  rep.benchmark = scores.benchmark;
  std::size_t n = labels.size();
  std::size_t n_pos = std::count(labels.begin(), labels.end(), 1);
  rep.positive_pct = n ? 100.0 * n_pos / n : 0.0;
  rep.negative_pct = n ? 100.0 * (n - n_pos) / n : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    bool above = scores.scores[i] >= scores.benchmark;
    if (above)
      (labels[i] ? rep.above_positive : rep.above_negative)++;
    else
      (labels[i] ? rep.below_positive : rep.below_negative)++;
  }
  return rep;
}

}  // namespace sxi

#endif  // SXI_SCORING_HPP
