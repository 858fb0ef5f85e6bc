#ifndef SXI_GBT_HPP
#define SXI_GBT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "sxi/common.hpp"

namespace sxi {

struct GbtConfig {
  int n_trees = 50;
  int depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 5;
  double l2 = 1.0;  // leaf regularization
};

struct GbtNode {
  int feature = -1;          // -1: leaf
  double threshold = 0.0;    // go left if x <= threshold
  int left = -1, right = -1;
  double value = 0.0;        // leaf weight (learning rate folded in)
};

struct GbtTree {
  std::vector<GbtNode> nodes;

  double predict(const std::vector<double>& row) const {
    int i = 0;
    while (nodes[i].feature >= 0)
      i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                      : nodes[i].right;
    return nodes[i].value;
  }
};

struct GbtModel {
  GbtConfig config;
  double base_margin = 0.0;  // prior log-odds
  std::vector<GbtTree> trees;
  std::vector<double> gain;        // total split gain per feature
  std::vector<double> train_loss;  // log-loss after each boosting round

  double predict_margin(const std::vector<double>& row) const {
    double m = base_margin;
    for (const auto& t : trees) m += t.predict(row);
    return m;
  }
  double predict_prob(const std::vector<double>& row) const {
    double m = std::clamp(predict_margin(row), -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-m));
  }
  // Gain importances normalized to sum 1; uniform when no splits were made.
  std::vector<double> importances() const {
    double total = std::accumulate(gain.begin(), gain.end(), 0.0);
    std::vector<double> imp(gain.size());
    if (total <= 0.0) {
      std::fill(imp.begin(), imp.end(),
                gain.empty() ? 0.0 : 1.0 / gain.size());
    } else {
      for (std::size_t j = 0; j < gain.size(); ++j) imp[j] = gain[j] / total;
    }
    return imp;
  }
};

namespace detail {

struct GbtBuilder {
  const std::vector<std::vector<double>>& X;  // row-major n x d
  const std::vector<int>& y;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const GbtConfig& cfg;
  GbtTree tree;
  std::vector<double>& gain_acc;

  static double leaf_objective(double g, double h, double l2) {
    return g * g / (h + l2);
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    double G = 0.0, H = 0.0;
    for (auto r : rows) {
      G += grad[r];
      H += hess[r];
    }
    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].value = -G / (H + cfg.l2) * cfg.learning_rate;

    if (depth >= cfg.depth ||
        rows.size() < static_cast<std::size_t>(2 * cfg.min_leaf))
      return node_id;
    bool pure = std::all_of(rows.begin(), rows.end(),
                            [&](std::size_t r) { return y[r] == y[rows[0]]; });
    if (pure) return node_id;

    std::size_t d = X.front().size();
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    double parent_obj = leaf_objective(G, H, cfg.l2);

    std::vector<std::size_t> order(rows);
    for (std::size_t j = 0; j < d; ++j) {
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return X[a][j] < X[b][j]; });
      double GL = 0.0, HL = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        GL += grad[order[k]];
        HL += hess[order[k]];
        if (X[order[k]][j] == X[order[k + 1]][j]) continue;  // tie block
        std::size_t left_n = k + 1;
        std::size_t right_n = order.size() - left_n;
        if (left_n < static_cast<std::size_t>(cfg.min_leaf) ||
            right_n < static_cast<std::size_t>(cfg.min_leaf))
          continue;
        double g = 0.5 * (leaf_objective(GL, HL, cfg.l2) +
                          leaf_objective(G - GL, H - HL, cfg.l2) - parent_obj);
        if (g > best_gain) {
          best_gain = g;
          best_feature = static_cast<int>(j);
          best_threshold = 0.5 * (X[order[k]][j] + X[order[k + 1]][j]);
        }
      }
    }
    if (best_feature < 0) return node_id;

    gain_acc[best_feature] += best_gain;
    std::vector<std::size_t> left, right;
    for (auto r : rows)
      (X[r][best_feature] <= best_threshold ? left : right).push_back(r);
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    int l = build(left, depth + 1);
    tree.nodes[node_id].left = l;
    int r = build(right, depth + 1);
    tree.nodes[node_id].right = r;
    return node_id;
  }
};

}  // namespace detail

// Second-order gradient boosting on logistic loss with exact greedy splits.
inline GbtModel fit_gbt(const std::vector<std::vector<double>>& X,
                        const std::vector<int>& y, const GbtConfig& cfg = {}) {
  std::size_t n = X.size();
  if (n == 0 || X.front().empty()) throw DataError("gbt: empty input");
  if (y.size() != n) throw DataError("gbt: label length mismatch");
  std::size_t n_pos = std::count(y.begin(), y.end(), 1);
  if (n_pos == 0 || n_pos == n) throw DataError("gbt: single-class input");
  std::size_t d = X.front().size();

  GbtModel model;
  model.config = cfg;
  model.gain.assign(d, 0.0);
  double p0 = static_cast<double>(n_pos) / n;
  model.base_margin = std::log(p0 / (1.0 - p0));

  std::vector<double> margin(n, model.base_margin);
  std::vector<double> grad(n), hess(n);
  auto log_loss = [&]() {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = std::clamp(margin[i], -30.0, 30.0);
      double p = 1.0 / (1.0 + std::exp(-m));
      loss -= y[i] ? std::log(p) : std::log(1.0 - p);
    }
    return loss / n;
  };

  for (int t = 0; t < cfg.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0 / (1.0 + std::exp(-std::clamp(margin[i], -30.0, 30.0)));
      grad[i] = p - y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    detail::GbtBuilder builder{X, y, grad, hess, cfg, {}, model.gain};
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    builder.build(rows, 0);
    for (std::size_t i = 0; i < n; ++i)
      margin[i] += builder.tree.predict(X[i]);
    model.trees.push_back(std::move(builder.tree));
    model.train_loss.push_back(log_loss());
  }
  return model;
}

}  // namespace sxi

#endif  // SXI_GBT_HPP
