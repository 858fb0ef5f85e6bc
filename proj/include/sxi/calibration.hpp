#ifndef SXI_CALIBRATION_HPP
#define SXI_CALIBRATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "sxi/scoring.hpp"

namespace sxi {

struct CalibrationConfig {
  // Positive sweep: multipliers 1.00..2.00 step 0.05 ("0% to +100%"),
  // extended past the grid maximum in 0.25 steps while strictly improving.
  double positive_max = 2.00;
  double grid_step = 0.05;
  double extended_step = 0.25;
  // Negative sweep: 1.00 down to 0.00; extension below zero clamps at 0.
  int max_outer_iterations = 10;
  int max_regens = 3;
};

struct CalibrationStep {
  int iteration = 0;
  std::string target;  // feature name, or "regen"
  double multiplier = 1.0;
  double accuracy = 0.0;
};

struct CalibrationState {
  std::vector<double> current_weights;
  double current_accuracy = 0.0;
  double baseline_accuracy = 0.0;
  std::vector<CalibrationStep> history;
  int regen_count = 0;
};

namespace detail {

inline double delineation_accuracy(const DataTable& normalized,
                                   const std::vector<double>& weights,
                                   const std::vector<int>& labels) {
  return *compute_scores(normalized, weights, &labels).delineation_accuracy;
}

}  // namespace detail

// Greedy multiplicative weight calibration: per feature in descending
// current-weight order, sweep the positive grid and accept the best
// strictly-improving multiplier (extending past the grid top while it keeps
// improving); fall back to the negative grid, then to regeneration from the
// network's refined weights.
inline CalibrationState calibrate(const std::vector<double>& weights,
                                  const DataTable& normalized_train,
                                  const std::vector<int>& labels,
                                  const std::vector<double>& refined_weights,
                                  const std::vector<int>& importance_counts,
                                  const CalibrationConfig& config = {}) {
  std::size_t d = weights.size();
  if (refined_weights.size() != d || importance_counts.size() != d)
    throw DataError("calibrate: weight vector length mismatch");

  CalibrationState state;
  state.current_weights = weights;
  state.current_accuracy =
      detail::delineation_accuracy(normalized_train, weights, labels);
  state.baseline_accuracy = state.current_accuracy;

  // Best-ever snapshot; regeneration may adopt a worse benchmark to keep
  // searching, but the returned state is the best seen.
  std::vector<double> best_weights = state.current_weights;
  double best_accuracy = state.current_accuracy;

  auto eval_with = [&](std::size_t feature, double multiplier) {
    std::vector<double> w = state.current_weights;
    w[feature] = std::max(w[feature] * multiplier, 0.0);
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) return -1.0;
    return detail::delineation_accuracy(normalized_train, w, labels);
  };

  // Sweep one grid over one feature; returns true if a step was accepted.
  auto sweep_feature = [&](std::size_t f, bool positive, int iteration) {
    std::vector<double> grid;
    if (positive) {
      for (double m = 1.0 + config.grid_step;
           m <= config.positive_max + 1e-12; m += config.grid_step)
        grid.push_back(m);
    } else {
      for (double m = 1.0 - config.grid_step; m >= -1e-12;
           m -= config.grid_step)
        grid.push_back(std::max(m, 0.0));
    }
    double best_mult = 1.0;
    double best_acc = state.current_accuracy;
    for (double m : grid) {
      double acc = eval_with(f, m);
      if (acc > best_acc) {
        best_acc = acc;
        best_mult = m;
      }
    }
    if (best_mult == 1.0) return false;

    // Extend beyond the grid edge while strictly improving.
    if (positive && std::abs(best_mult - config.positive_max) < 1e-9) {
      for (double m = best_mult + config.extended_step;;
           m += config.extended_step) {
        double acc = eval_with(f, m);
        if (acc <= best_acc) break;
        best_acc = acc;
        best_mult = m;
      }
    }
    // Negative extension below 0% would go negative; clamped at weight 0,
    // which the grid already reaches.

    state.current_weights[f] =
        std::max(state.current_weights[f] * best_mult, 0.0);
    state.current_accuracy = best_acc;
    state.history.push_back({iteration, "", best_mult, best_acc});
    return true;
  };

  auto feature_order = [&]() {
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return state.current_weights[a] >
                              state.current_weights[b];
                     });
    return order;
  };
  auto names = normalized_train.feature_names();

  for (int iter = 0; iter < config.max_outer_iterations; ++iter) {
    if (state.current_accuracy >= 1.0) break;
    bool improved = false;
    for (std::size_t f : feature_order()) {
      std::size_t before = state.history.size();
      if (sweep_feature(f, /*positive=*/true, iter)) {
        state.history[before].target = names[f];
        improved = true;
      }
    }
    if (!improved) {
      for (std::size_t f : feature_order()) {
        std::size_t before = state.history.size();
        if (sweep_feature(f, /*positive=*/false, iter)) {
          state.history[before].target = names[f];
          improved = true;
        }
      }
    }
    if (improved) {
      if (state.current_accuracy > best_accuracy) {
        best_accuracy = state.current_accuracy;
        best_weights = state.current_weights;
      }
      continue;
    }
    if (state.regen_count >= config.max_regens) break;

    // Regenerate: refined network weights with the top-5 refined features
    // boosted by their importance counts, renormalized.
    ++state.regen_count;
    std::vector<double> w = refined_weights;
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return refined_weights[a] > refined_weights[b];
                     });
    for (std::size_t k = 0; k < std::min<std::size_t>(5, d); ++k)
      w[order[k]] *= importance_counts[order[k]];
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (total <= 0.0) break;
    for (double& v : w) v /= total;
    if (w == state.current_weights) break;  // nothing new to try
    state.current_weights = std::move(w);
    state.current_accuracy = detail::delineation_accuracy(
        normalized_train, state.current_weights, labels);
    state.history.push_back({iter, "regen", 1.0, state.current_accuracy});
    if (state.current_accuracy > best_accuracy) {
      best_accuracy = state.current_accuracy;
      best_weights = state.current_weights;
    }
  }

  state.current_weights = std::move(best_weights);
  state.current_accuracy = best_accuracy;
  return state;
}

struct AlphaTuneResult {
  double alpha = 1.0;
  double accuracy = 0.0;
};

// Sweep alpha over {0.5, 0.6, ..., 1.5}; validation scores are alpha-scaled
// and flagged against the FIXED training benchmark with the training
// orientation. Ties go to the smallest alpha.
inline AlphaTuneResult alpha_tune(const ScoreSet& scores_train,
                                  const DataTable& normalized_val,
                                  const std::vector<double>& weights,
                                  const std::vector<int>& labels_val) {
  if (normalized_val.n_rows() == 0) throw DataError("empty validation set");
  ScoreSet val = compute_scores(normalized_val, weights);
  double benchmark = scores_train.benchmark;
  int orientation = scores_train.orientation;

  AlphaTuneResult best;
  best.accuracy = -1.0;
  for (int step = 0; step <= 10; ++step) {
    double alpha = 0.5 + 0.1 * step;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < val.scores.size(); ++i) {
      int flag =
          orientation * (alpha * val.scores[i] - benchmark) >= 0.0 ? 1 : 0;
      if (flag == labels_val[i]) ++agree;
    }
    double acc = static_cast<double>(agree) / val.scores.size();
    if (acc > best.accuracy) {
      best.accuracy = acc;
      best.alpha = alpha;
    }
  }
  return best;
}

}  // namespace sxi

#endif  // SXI_CALIBRATION_HPP
