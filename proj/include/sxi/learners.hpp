#ifndef SXI_LEARNERS_HPP
#define SXI_LEARNERS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "sxi/gbt.hpp"
#include "sxi/lasso.hpp"

namespace sxi {

enum class LearnerKind { lasso, complement_nb, gbt, mutual_info, pca };

inline std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::lasso: return "lasso";
    case LearnerKind::complement_nb: return "complement_nb";
    case LearnerKind::gbt: return "gbt";
    case LearnerKind::mutual_info: return "mutual_info";
    case LearnerKind::pca: return "pca";
  }
  return "?";
}

struct AlgorithmWeights {
  LearnerKind algorithm = LearnerKind::lasso;
  std::vector<std::string> feature_names;
  std::vector<double> raw;         // signed
  std::vector<double> normalized;  // |raw| / sum|raw|; uniform if all zero
  std::vector<int> top5;           // feature indices by |raw| desc, <= 5
};

inline AlgorithmWeights make_algorithm_weights(
    LearnerKind kind, const std::vector<std::string>& names,
    std::vector<double> raw) {
  AlgorithmWeights aw;
  aw.algorithm = kind;
  aw.feature_names = names;
  aw.raw = std::move(raw);
  std::size_t d = aw.raw.size();
  double total = 0.0;
  for (double v : aw.raw) total += std::abs(v);
  aw.normalized.assign(d, 0.0);
  if (total > 0.0)
    for (std::size_t j = 0; j < d; ++j)
      aw.normalized[j] = std::abs(aw.raw[j]) / total;
  else
    std::fill(aw.normalized.begin(), aw.normalized.end(), d ? 1.0 / d : 0.0);

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  // Descending by |raw|, ties by feature order.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(aw.raw[a]) > std::abs(aw.raw[b]);
  });
  order.resize(std::min<std::size_t>(5, d));
  aw.top5 = std::move(order);
  return aw;
}

// Complement naive-Bayes style weights with add-one smoothing:
//   w_{c,f} = log((sum_{i not in c} x_if + 1) / (sum_{i not in c} sum_g x_ig + d))
// per-feature weight = |w_pos,f - w_neg,f|. X must be nonnegative.
inline AlgorithmWeights fit_complement_nb(
    const std::vector<std::vector<double>>& X, const std::vector<int>& y,
    const std::vector<std::string>& names) {
  std::size_t n = X.size();
  if (n == 0) throw DataError("cnb: empty input");
  std::size_t d = X.front().size();
  std::size_t n_pos = std::count(y.begin(), y.end(), 1);
  if (n_pos == 0 || n_pos == n) throw DataError("cnb: both classes required");

  std::vector<double> comp_sum[2] = {std::vector<double>(d, 0.0),
                                     std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (X[i][j] < 0.0) throw DataError("cnb: negative input");
      // Row i contributes to the complement of its own class.
      comp_sum[1 - y[i]][j] += X[i][j];
    }
  std::vector<double> raw(d);
  for (std::size_t j = 0; j < d; ++j) {
    double w[2];
    for (int c = 0; c < 2; ++c) {
      double denom =
          std::accumulate(comp_sum[c].begin(), comp_sum[c].end(), 0.0) + d;
      w[c] = std::log((comp_sum[c][j] + 1.0) / denom);
    }
    raw[j] = std::abs(w[1] - w[0]);
  }
  return make_algorithm_weights(LearnerKind::complement_nb, names,
                                std::move(raw));
}

// Histogram mutual information in nats: equal-width bins over the observed
// range; zero-count cells are skipped.
inline double mutual_information_single(const std::vector<double>& x,
                                        const std::vector<int>& y, int bins) {
  if (bins < 2) throw DataError("mi: bins must be >= 2");
  std::size_t n = x.size();
  if (n == 0) return 0.0;
  double lo = *std::min_element(x.begin(), x.end());
  double hi = *std::max_element(x.begin(), x.end());
  if (lo == hi) return 0.0;  // constant feature
  std::vector<std::vector<double>> joint(bins, std::vector<double>(2, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    int b = static_cast<int>((x[i] - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    joint[b][y[i]] += 1.0;
  }
  std::vector<double> pb(bins, 0.0), pc(2, 0.0);
  for (int b = 0; b < bins; ++b)
    for (int c = 0; c < 2; ++c) {
      joint[b][c] /= n;
      pb[b] += joint[b][c];
      pc[c] += joint[b][c];
    }
  double mi = 0.0;
  for (int b = 0; b < bins; ++b)
    for (int c = 0; c < 2; ++c)
      if (joint[b][c] > 0.0)
        mi += joint[b][c] * std::log(joint[b][c] / (pb[b] * pc[c]));
  return std::max(mi, 0.0);
}

inline AlgorithmWeights mutual_information(
    const std::vector<std::vector<double>>& X, const std::vector<int>& y,
    const std::vector<std::string>& names, int bins = 10) {
  std::size_t d = X.empty() ? 0 : X.front().size();
  std::vector<double> raw(d, 0.0);
  std::vector<double> col(X.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < X.size(); ++i) col[i] = X[i][j];
    raw[j] = mutual_information_single(col, y, bins);
  }
  return make_algorithm_weights(LearnerKind::mutual_info, names,
                                std::move(raw));
}

struct PcaFit {
  Eigen::MatrixXd loadings;        // columns are components, orthonormal
  std::vector<double> explained;   // eigenvalues, non-increasing
};

inline PcaFit fit_pca_full(const std::vector<std::vector<double>>& X) {
  std::size_t n = X.size();
  if (n < 2) throw DataError("pca: need at least 2 rows");
  std::size_t d = X.front().size();
  Eigen::MatrixXd M(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) M(i, j) = X[i][j];
  Eigen::RowVectorXd mean = M.colwise().mean();
  M.rowwise() -= mean;
  Eigen::MatrixXd cov = M.transpose() * M / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  // Eigen returns ascending eigenvalues; reverse to descending.
  PcaFit fit;
  fit.loadings.resize(d, d);
  fit.explained.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    fit.loadings.col(k) = solver.eigenvectors().col(d - 1 - k);
    fit.explained[k] = std::max(solver.eigenvalues()(d - 1 - k), 0.0);
  }
  return fit;
}

inline AlgorithmWeights fit_pca(const std::vector<std::vector<double>>& X,
                                const std::vector<std::string>& names) {
  PcaFit fit = fit_pca_full(X);
  std::size_t d = names.size();
  std::vector<double> raw(d);
  for (std::size_t j = 0; j < d; ++j) raw[j] = std::abs(fit.loadings(j, 0));
  return make_algorithm_weights(LearnerKind::pca, names, std::move(raw));
}

inline AlgorithmWeights fit_lasso_weights(
    const std::vector<std::vector<double>>& X, const std::vector<int>& y,
    const std::vector<std::string>& names, double lambda = 0.01) {
  std::vector<double> yd(y.begin(), y.end());
  LassoFit fit = fit_lasso(X, yd, lambda);
  return make_algorithm_weights(LearnerKind::lasso, names,
                                std::vector<double>(fit.coefficients));
}

inline AlgorithmWeights fit_gbt_weights(
    const std::vector<std::vector<double>>& X, const std::vector<int>& y,
    const std::vector<std::string>& names, const GbtConfig& cfg = {}) {
  GbtModel model = fit_gbt(X, y, cfg);
  return make_algorithm_weights(LearnerKind::gbt, names, model.importances());
}

struct FeatureWeightSet {
  std::vector<std::string> feature_names;
  std::vector<AlgorithmWeights> per_algorithm;
  std::vector<double> composite;       // sums to 1 over retained features
  std::vector<std::string> retained;   // features with composite > 0
  std::vector<int> importance_counts;  // 1 + top-5 frequency
};

inline std::vector<int> top5_importance(
    const std::vector<AlgorithmWeights>& per_algorithm, std::size_t d) {
  std::vector<int> counts(d, 1);  // baseline weight of 1
  for (const auto& aw : per_algorithm)
    for (int f : aw.top5)
      if (f >= 0 && static_cast<std::size_t>(f) < d) ++counts[f];
  return counts;
}

inline FeatureWeightSet composite_weights(
    std::vector<AlgorithmWeights> per_algorithm) {
  if (per_algorithm.empty()) throw DataError("composite: no algorithms");
  const auto& names = per_algorithm.front().feature_names;
  std::size_t d = names.size();
  for (const auto& aw : per_algorithm)
    if (aw.feature_names != names)
      throw DataError("composite: algorithms disagree on feature set");

  FeatureWeightSet set;
  set.feature_names = names;
  set.composite.assign(d, 0.0);
  for (const auto& aw : per_algorithm)
    for (std::size_t j = 0; j < d; ++j) set.composite[j] += aw.normalized[j];
  double total = std::accumulate(set.composite.begin(), set.composite.end(),
                                 0.0);
  if (total > 0.0)
    for (double& v : set.composite) v /= total;
  for (std::size_t j = 0; j < d; ++j)
    if (set.composite[j] > 0.0) set.retained.push_back(names[j]);
  set.importance_counts = top5_importance(per_algorithm, d);
  set.per_algorithm = std::move(per_algorithm);
  return set;
}

}  // namespace sxi

#endif  // SXI_LEARNERS_HPP
