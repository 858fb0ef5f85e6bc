#ifndef SXI_SEARCH_HPP
#define SXI_SEARCH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sxi/data.hpp"
#include "sxi/metrics.hpp"
#include "sxi/network.hpp"

namespace sxi {

// Discrete candidate sets for every NetworkSpec field. Hidden layouts are
// (layer count x uniform width) combinations.
struct SearchSpace {
  std::vector<int> hidden_layer_counts = {1, 2, 3};
  std::vector<int> hidden_widths = {8, 16, 32};
  std::vector<Activation> activations = {Activation::relu, Activation::tanh};
  std::vector<Optimizer> optimizers = {Optimizer::sgd, Optimizer::momentum,
                                       Optimizer::adaptive};
  std::vector<double> learning_rates = {0.1, 0.01, 0.001};
  std::vector<int> batch_sizes = {32, 128};
  std::vector<int> epochs = {50, 200};
  int budget = 15;
  std::uint64_t seed = 0;
  bool random_only = false;  // pure-random fallback, same budget

  void validate() const {
    if (budget < 1) throw DataError("search budget must be >= 1");
    if (hidden_layer_counts.empty() || hidden_widths.empty() ||
        activations.empty() || optimizers.empty() || learning_rates.empty() ||
        batch_sizes.empty() || epochs.empty())
      throw DataError("search space has an empty candidate set");
  }
};

struct SearchResult {
  NetworkSpec best_spec;
  double best_cv_auc = 0.0;
  std::vector<std::pair<NetworkSpec, double>> evaluations;  // in order
};

namespace detail {

inline std::vector<NetworkSpec> enumerate_candidates(const SearchSpace& space,
                                                     int input_size) {
  std::vector<NetworkSpec> out;
  for (int layers : space.hidden_layer_counts)
    for (int width : space.hidden_widths)
      for (Activation act : space.activations)
        for (Optimizer opt : space.optimizers)
          for (double lr : space.learning_rates)
            for (int bs : space.batch_sizes)
              for (int ep : space.epochs) {
                NetworkSpec spec;
                spec.layer_sizes.push_back(input_size);
                for (int l = 0; l < layers; ++l)
                  spec.layer_sizes.push_back(width);
                spec.layer_sizes.push_back(1);
                spec.activations.assign(layers, act);
                spec.optimizer = opt;
                spec.learning_rate = lr;
                spec.batch_size = bs;
                spec.epochs = ep;
                out.push_back(std::move(spec));
              }
  return out;
}

// Numeric + one-hot encoding, standardized per dimension over the
// candidate set so the kernel sees comparable scales.
inline Eigen::MatrixXd encode_candidates(const std::vector<NetworkSpec>& specs,
                                         const SearchSpace& space) {
  std::size_t n_act = space.activations.size();
  std::size_t n_opt = space.optimizers.size();
  std::size_t dim = 2 + n_act + n_opt + 3;
  Eigen::MatrixXd E(specs.size(), dim);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const NetworkSpec& s = specs[i];
    std::size_t c = 0;
    E(i, c++) = static_cast<double>(s.layer_sizes.size() - 2);
    E(i, c++) = std::log2(static_cast<double>(s.layer_sizes[1]));
    for (std::size_t a = 0; a < n_act; ++a)
      E(i, c++) = s.activations.front() == space.activations[a] ? 1.0 : 0.0;
    for (std::size_t o = 0; o < n_opt; ++o)
      E(i, c++) = s.optimizer == space.optimizers[o] ? 1.0 : 0.0;
    E(i, c++) = std::log10(s.learning_rate);
    E(i, c++) = std::log2(static_cast<double>(s.batch_size));
    E(i, c++) = static_cast<double>(s.epochs) / 100.0;
  }
  for (Eigen::Index j = 0; j < E.cols(); ++j) {
    double mean = E.col(j).mean();
    double sd = std::sqrt((E.col(j).array() - mean).square().mean());
    E.col(j).array() -= mean;
    if (sd > 0.0) E.col(j) /= sd;
  }
  return E;
}

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace detail

// Mean CV AUC of a candidate network under stratified k-fold.
inline double cv_auc(const NetworkSpec& spec,
                     const std::vector<std::vector<double>>& X,
                     const std::vector<int>& y, int k,
                     const std::vector<int>& importance_counts,
                     std::uint64_t seed) {
  auto folds = stratified_kfold(y, k, seed);
  double total = 0.0;
  int used = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& [train_rows, holdout_rows] = folds[f];
    std::vector<std::vector<double>> Xt, Xh;
    std::vector<int> yt, yh;
    for (auto r : train_rows) {
      Xt.push_back(X[r]);
      yt.push_back(y[r]);
    }
    for (auto r : holdout_rows) {
      Xh.push_back(X[r]);
      yh.push_back(y[r]);
    }
    NetworkSpec fold_spec = spec;
    fold_spec.seed = derive_seed(seed, "cv_fold", f);
    NetworkParams init = init_custom(fold_spec, importance_counts);
    TrainResult trained = train(fold_spec, std::move(init), Xt, yt);
    std::vector<double> p = forward(fold_spec, trained.params, Xh);
    total += roc_auc(p, yh).auc;
    ++used;
  }
  return used ? total / used : 0.0;
}

// Sequential model-based search: seeded-random warm start, then a GP
// surrogate (squared-exponential kernel) with expected-improvement
// acquisition over the remaining candidates. Returns the argmax of the
// observed CV AUC, ties to the earliest evaluation.
inline SearchResult hyperparameter_search(
    const SearchSpace& space, const std::vector<std::vector<double>>& X,
    const std::vector<int>& y, int k,
    const std::vector<int>& importance_counts) {
  space.validate();
  if (k < 2) throw DataError("search: k must be >= 2");
  int input_size = static_cast<int>(X.front().size());
  std::vector<NetworkSpec> candidates =
      detail::enumerate_candidates(space, input_size);
  Eigen::MatrixXd E = detail::encode_candidates(candidates, space);
  double length_scale = std::sqrt(static_cast<double>(E.cols()));

  std::size_t n_cand = candidates.size();
  int budget = std::min<int>(space.budget, static_cast<int>(n_cand));

  Rng rng(derive_seed(space.seed, "search"));
  std::vector<std::size_t> pool(n_cand);
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);

  std::vector<std::size_t> evaluated;
  std::vector<double> observed;
  SearchResult result;

  auto evaluate = [&](std::size_t idx) {
    NetworkSpec spec = candidates[idx];
    spec.seed = derive_seed(space.seed, "candidate", idx);
    double auc = cv_auc(spec, X, y, k, importance_counts, spec.seed);
    evaluated.push_back(idx);
    observed.push_back(auc);
    result.evaluations.emplace_back(spec, auc);
  };

  int warm = space.random_only ? budget : std::min(budget, 5);
  for (int i = 0; i < warm; ++i) evaluate(pool[i]);

  for (int step = warm; step < budget; ++step) {
    // GP posterior over evaluated points.
    std::size_t m = evaluated.size();
    Eigen::MatrixXd K(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        double d2 = (E.row(evaluated[a]) - E.row(evaluated[b])).squaredNorm();
        K(a, b) = std::exp(-d2 / (2.0 * length_scale * length_scale));
      }
    K.diagonal().array() += 1e-6;
    Eigen::VectorXd yv(m);
    double ymean = 0.0;
    for (std::size_t a = 0; a < m; ++a) ymean += observed[a];
    ymean /= static_cast<double>(m);
    for (std::size_t a = 0; a < m; ++a) yv(a) = observed[a] - ymean;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    Eigen::VectorXd alpha = llt.solve(yv);

    double best_observed = *std::max_element(observed.begin(), observed.end());
    double best_ei = -1.0;
    std::size_t best_idx = n_cand;
    for (std::size_t c = 0; c < n_cand; ++c) {
      if (std::find(evaluated.begin(), evaluated.end(), c) != evaluated.end())
        continue;
      Eigen::VectorXd kstar(m);
      for (std::size_t a = 0; a < m; ++a) {
        double d2 = (E.row(c) - E.row(evaluated[a])).squaredNorm();
        kstar(a) = std::exp(-d2 / (2.0 * length_scale * length_scale));
      }
      double mu = ymean + kstar.dot(alpha);
      Eigen::VectorXd v = llt.solve(kstar);
      double var = std::max(1.0 - kstar.dot(v), 1e-12);
      double sigma = std::sqrt(var);
      double improve = mu - best_observed - 0.01;
      double z = improve / sigma;
      double ei = improve * detail::normal_cdf(z) +
                  sigma * detail::normal_pdf(z);
      if (ei > best_ei) {
        best_ei = ei;
        best_idx = c;
      }
    }
    if (best_idx == n_cand) break;  // everything evaluated
    evaluate(best_idx);
  }

  std::size_t winner = 0;
  for (std::size_t i = 1; i < observed.size(); ++i)
    if (observed[i] > observed[winner]) winner = i;
  if (observed.empty() || !std::isfinite(observed[winner]))
    throw InternalError("search budget exhausted without a finite score");
  result.best_spec = result.evaluations[winner].first;
  result.best_cv_auc = observed[winner];
  return result;
}

}  // namespace sxi

#endif  // SXI_SEARCH_HPP
