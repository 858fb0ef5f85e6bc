#ifndef SXI_INSIGHTS_HPP
#define SXI_INSIGHTS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sxi/data.hpp"
#include "sxi/scoring.hpp"

namespace sxi {

struct AdjustmentPolicy {
  double p_up = 0.10;    // increase for risk-elevating features
  double p_down = 0.10;  // decrease for risk-lowering features
  int correlation_sign = +1;  // sign of corr(SXI score, target)

  void validate() const {
    if (p_up < 0.0 || p_up >= 1.0 || p_down < 0.0 || p_down >= 1.0)
      throw DataError("adjustment percentages must be in [0,1)");
    if (correlation_sign != 1 && correlation_sign != -1)
      throw DataError("correlation sign must be +1 or -1");
  }
};

// The four percentage transforms: with a positive score-target
// correlation, positive-weight features scale by (1+p_up) and
// negative-weight by (1-p_down); a negative correlation swaps the two.
inline DataTable adjust_features(const DataTable& table,
                                 const std::vector<double>& feature_signs,
                                 const AdjustmentPolicy& policy) {
  policy.validate();
  auto idx = table.feature_indices();
  if (feature_signs.size() != idx.size())
    throw DataError("feature sign vector length mismatch");
  DataTable out = table;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    bool positive_weight = feature_signs[j] >= 0.0;
    double mult;
    if (policy.correlation_sign == +1)
      mult = positive_weight ? 1.0 + policy.p_up : 1.0 - policy.p_down;
    else
      mult = positive_weight ? 1.0 - policy.p_down : 1.0 + policy.p_up;
    for (double& v : out.columns[idx[j]].values) v *= mult;
  }
  return out;
}

struct ForestConfig {
  int n_trees = 25;
  int depth = 4;
  int min_leaf = 5;
  std::uint64_t seed = 0;
  // feature_subsample defaults to ceil(sqrt(d)) when 0
  int feature_subsample = 0;
};

struct ForestNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  int majority = 0;
  std::size_t count = 0;   // bootstrap rows at this node
  double purity = 0.0;     // majority fraction at this node
};

struct ForestTree {
  std::vector<ForestNode> nodes;

  int predict(const std::vector<double>& row) const {
    int i = 0;
    while (nodes[i].feature >= 0)
      i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                      : nodes[i].right;
    return nodes[i].majority;
  }
};

struct RandomForest {
  ForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<ForestTree> trees;

  // Majority vote; exact ties go to class 0.
  int predict(const std::vector<double>& row) const {
    int votes = 0;
    for (const auto& t : trees) votes += t.predict(row);
    return 2 * votes > static_cast<int>(trees.size()) ? 1 : 0;
  }
};

namespace detail {

struct ForestTreeBuilder {
  const std::vector<std::vector<double>>& X;
  const std::vector<int>& y;
  const ForestConfig& cfg;
  int n_features_per_split;
  Rng& rng;
  ForestTree tree;

  static double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    double p = static_cast<double>(pos) / total;
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    std::size_t pos = 0;
    for (auto r : rows) pos += y[r];
    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].count = rows.size();
    tree.nodes[node_id].majority = 2 * pos > rows.size() ? 1 : 0;
    tree.nodes[node_id].purity =
        rows.empty() ? 1.0
                     : static_cast<double>(std::max(pos, rows.size() - pos)) /
                           rows.size();

    if (depth >= cfg.depth || pos == 0 || pos == rows.size() ||
        rows.size() < static_cast<std::size_t>(2 * cfg.min_leaf))
      return node_id;

    std::size_t d = X.front().size();
    std::vector<std::size_t> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    std::shuffle(feats.begin(), feats.end(), rng);
    feats.resize(std::min<std::size_t>(n_features_per_split, d));

    double parent = gini(pos, rows.size());
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::size_t> order(rows);
    for (std::size_t j : feats) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return X[a][j] < X[b][j];
      });
      std::size_t pos_l = 0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        pos_l += y[order[k]];
        if (X[order[k]][j] == X[order[k + 1]][j]) continue;
        std::size_t nl = k + 1, nr = order.size() - nl;
        if (nl < static_cast<std::size_t>(cfg.min_leaf) ||
            nr < static_cast<std::size_t>(cfg.min_leaf))
          continue;
        double gain = parent -
                      (static_cast<double>(nl) / rows.size()) * gini(pos_l, nl) -
                      (static_cast<double>(nr) / rows.size()) *
                          gini(pos - pos_l, nr);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(j);
          best_threshold = 0.5 * (X[order[k]][j] + X[order[k + 1]][j]);
        }
      }
    }
    if (best_feature < 0) return node_id;

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

inline RandomForest fit_random_forest(const DataTable& table,
                                      ForestConfig cfg = {}) {
  auto idx = table.feature_indices();
  auto y = table.labels();
  std::size_t n = table.n_rows();
  std::size_t n_pos = std::count(y.begin(), y.end(), 1);
  if (n_pos == 0 || n_pos == n)
    throw DataError("forest: both classes required");

  std::vector<std::vector<double>> X(n, std::vector<double>(idx.size()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < idx.size(); ++j)
      X[i][j] = table.columns[idx[j]].values[i];

  if (cfg.feature_subsample <= 0)
    cfg.feature_subsample = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(idx.size()))));

  RandomForest forest;
  forest.config = cfg;
  for (int j : idx) forest.feature_names.push_back(table.columns[j].name);

  for (int t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(cfg.seed, "forest_tree", static_cast<std::uint64_t>(t)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = pick(rng);
    detail::ForestTreeBuilder builder{X, y, cfg, cfg.feature_subsample, rng,
                                      {}};
    builder.build(sample, 0);
    forest.trees.push_back(std::move(builder.tree));
  }
  return forest;
}

enum class Comparator { le, gt };  // x <= t  /  x > t

struct RuleCondition {
  std::string feature;
  Comparator comparator = Comparator::le;
  double threshold = 0.0;
};

struct RulePath {
  std::vector<RuleCondition> conditions;  // contradictions merged to intervals
  int leaf_class = 0;
  double purity = 0.0;     // verified on the full training table
  std::size_t coverage = 0;  // rows of the training table matching the path
};

namespace detail {

struct RawPath {
  std::vector<RuleCondition> conditions;
  int leaf_class = 0;
};

inline void collect_paths(const ForestTree& tree,
                          const std::vector<std::string>& names, int node,
                          std::vector<RuleCondition>& prefix,
                          std::vector<RawPath>& out) {
  const ForestNode& nd = tree.nodes[node];
  if (nd.feature < 0) {
    out.push_back({prefix, nd.majority});
    return;
  }
  prefix.push_back({names[nd.feature], Comparator::le, nd.threshold});
  collect_paths(tree, names, nd.left, prefix, out);
  prefix.back().comparator = Comparator::gt;
  collect_paths(tree, names, nd.right, prefix, out);
  prefix.pop_back();
}

inline bool row_matches(const DataTable& table,
                        const std::vector<RuleCondition>& conds,
                        std::size_t row) {
  for (const auto& c : conds) {
    int j = table.column_index(c.feature);
    double v = table.columns[j].values[row];
    if (c.comparator == Comparator::le ? v > c.threshold : v <= c.threshold)
      return false;
  }
  return true;
}

// Merge repeated conditions on one feature into the tightest interval.
inline std::vector<RuleCondition> merge_conditions(
    const std::vector<RuleCondition>& conds) {
  std::vector<RuleCondition> out;
  std::vector<std::string> seen;
  for (const auto& c : conds) {
    if (std::find(seen.begin(), seen.end(), c.feature) != seen.end()) continue;
    seen.push_back(c.feature);
    std::optional<double> upper, lower;
    for (const auto& o : conds) {
      if (o.feature != c.feature) continue;
      if (o.comparator == Comparator::le)
        upper = upper ? std::min(*upper, o.threshold) : o.threshold;
      else
        lower = lower ? std::max(*lower, o.threshold) : o.threshold;
    }
    if (lower) out.push_back({c.feature, Comparator::gt, *lower});
    if (upper) out.push_back({c.feature, Comparator::le, *upper});
  }
  return out;
}

}  // namespace detail

// Best root-to-leaf path predicting `target_class`, scored purity x coverage
// against the full training table; ties go to higher coverage, then the
// earlier tree.
inline RulePath extract_target_path(const RandomForest& forest,
                                    const DataTable& train, int target_class) {
  std::vector<detail::RawPath> paths;
  for (const auto& tree : forest.trees) {
    std::vector<RuleCondition> prefix;
    detail::collect_paths(tree, forest.feature_names, 0, prefix, paths);
  }

  RulePath best;
  double best_score = -1.0;
  bool found = false;
  std::size_t n = train.n_rows();
  auto y = train.labels();
  for (const auto& raw : paths) {
    if (raw.leaf_class != target_class) continue;
    std::size_t coverage = 0, hits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (detail::row_matches(train, raw.conditions, i)) {
        ++coverage;
        if (y[i] == target_class) ++hits;
      }
    if (coverage == 0) continue;
    double purity = static_cast<double>(hits) / coverage;
    double score = purity * static_cast<double>(coverage);
    if (score > best_score ||
        (score == best_score && coverage > best.coverage)) {
      best_score = score;
      best.conditions = detail::merge_conditions(raw.conditions);
      best.leaf_class = target_class;
      best.purity = purity;
      best.coverage = coverage;
      found = true;
    }
  }
  if (!found) throw DataError("no qualifying path for target class " +
                              std::to_string(target_class));
  return best;
}

inline std::string render_rule(const RulePath& path,
                               const std::string& positive_name = "Sepsis",
                               const std::string& negative_name = "No Sepsis") {
  std::ostringstream os;
  os.precision(6);
  // Pair up interval bounds per feature for "a < F <= b" rendering.
  std::vector<std::string> done;
  bool first = true;
  for (std::size_t i = 0; i < path.conditions.size(); ++i) {
    const auto& c = path.conditions[i];
    if (std::find(done.begin(), done.end(), c.feature) != done.end()) continue;
    done.push_back(c.feature);
    std::optional<double> lower, upper;
    for (const auto& o : path.conditions) {
      if (o.feature != c.feature) continue;
      if (o.comparator == Comparator::gt) lower = o.threshold;
      else upper = o.threshold;
    }
    if (!first) os << " AND ";
    first = false;
    if (lower && upper)
      os << *lower << " < " << c.feature << " <= " << *upper;
    else if (lower)
      os << c.feature << " > " << *lower;
    else
      os << c.feature << " <= " << *upper;
  }
  if (first) os << "(all rows)";
  os << " -> " << (path.leaf_class == 1 ? positive_name : negative_name);
  return os.str();
}

struct Recommendations {
  std::string text;
  nlohmann::json json;
};

inline Recommendations render_recommendations(const RulePath& path,
                                              const AdjustmentPolicy& policy,
                                              const ScoreSet& scores) {
  Recommendations rec;
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : path.conditions)
    conds.push_back({{"feature", c.feature},
                     {"comparator", c.comparator == Comparator::le ? "<=" : ">"},
                     {"threshold", c.threshold}});
  rec.json = {{"rule", render_rule(path)},
              {"conditions", conds},
              {"target_class", path.leaf_class},
              {"purity", path.purity},
              {"coverage", path.coverage},
              {"adjustment", {{"p_up", policy.p_up},
                              {"p_down", policy.p_down},
                              {"correlation_sign", policy.correlation_sign}}},
              {"benchmark_score", scores.benchmark}};

  std::ostringstream os;
  os.precision(6);
  os << "Target decision path\n"
     << "  " << render_rule(path) << "\n"
     << "  purity " << path.purity << ", coverage " << path.coverage
     << " rows\n";
  if (path.conditions.empty())
    os << "  (root leaf: rule reflects the prior class rate only)\n";
  os << "Applied feature adjustments\n"
     << "  risk-elevating features: "
     << (policy.correlation_sign == +1 ? "+" : "-")
     << 100.0 * (policy.correlation_sign == +1 ? policy.p_up : policy.p_down)
     << "%\n"
     << "  risk-lowering features: "
     << (policy.correlation_sign == +1 ? "-" : "+")
     << 100.0 * (policy.correlation_sign == +1 ? policy.p_down : policy.p_up)
     << "%\n"
     << "Benchmark SXI++ score: " << scores.benchmark << "\n";
  rec.text = os.str();
  return rec;
}

}  // namespace sxi

#endif  // SXI_INSIGHTS_HPP
