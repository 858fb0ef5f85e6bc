#ifndef SXI_NETWORK_HPP
#define SXI_NETWORK_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "sxi/common.hpp"

namespace sxi {

enum class Activation { relu, tanh, sigmoid };
enum class Optimizer { sgd, momentum, adaptive };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

inline std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::sgd: return "sgd";
    case Optimizer::momentum: return "momentum";
    case Optimizer::adaptive: return "adaptive";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  throw DataError("unknown activation: " + s);
}

inline Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "momentum") return Optimizer::momentum;
  if (s == "adaptive") return Optimizer::adaptive;
  throw DataError("unknown optimizer: " + s);
}

constexpr double kLogitClamp = 30.0;

struct NetworkSpec {
  std::vector<int> layer_sizes;          // input d, hidden..., output 1
  std::vector<Activation> activations;   // one per hidden layer
  Optimizer optimizer = Optimizer::sgd;
  double learning_rate = 0.01;
  int batch_size = 32;
  int epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (layer_sizes.size() < 3)
      throw DataError("network needs at least one hidden layer");
    if (layer_sizes.back() != 1)
      throw DataError("output layer size must be 1");
    if (activations.size() != layer_sizes.size() - 2)
      throw DataError("need one activation per hidden layer");
    if (learning_rate <= 0.0) throw DataError("learning rate must be positive");
  }
};

struct NetworkParams {
  // W[l] is (fan_in x fan_out) so row f of W[0] belongs to input feature f.
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  std::vector<double> epoch_loss;  // monitor-split loss per epoch

  std::size_t n_layers() const { return W.size(); }
};

// Importance-weighted Glorot init. The first layer's uniform limit uses the
// effective fan-in (sum of importance counts) and each input row is scaled
// by importance_f / mean(importance). Deeper layers are standard Glorot.
inline NetworkParams init_custom(const NetworkSpec& spec,
                                 const std::vector<int>& importance_counts) {
  spec.validate();
  std::size_t d = static_cast<std::size_t>(spec.layer_sizes.front());
  if (importance_counts.size() != d)
    throw DataError("importance count length != input size");
  for (int c : importance_counts)
    if (c < 1) throw DataError("importance counts must be >= 1");

  Rng rng(derive_seed(spec.seed, "init"));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  double n_eff = std::accumulate(importance_counts.begin(),
                                 importance_counts.end(), 0.0);
  double mean_imp = n_eff / static_cast<double>(d);

  NetworkParams params;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    int fan_in = spec.layer_sizes[l];
    int fan_out = spec.layer_sizes[l + 1];
    double limit = l == 0 ? std::sqrt(6.0 / (n_eff + fan_out))
                          : std::sqrt(6.0 / (fan_in + fan_out));
    Eigen::MatrixXd W(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j) {
        double v = limit * unit(rng);
        if (l == 0) v *= importance_counts[i] / mean_imp;
        W(i, j) = v;
      }
    params.W.push_back(std::move(W));
    params.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return params;
}

inline NetworkParams init_glorot(const NetworkSpec& spec) {
  return init_custom(spec,
                     std::vector<int>(spec.layer_sizes.front(), 1));
}

namespace detail {

inline void apply_activation(Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::sigmoid:
      z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      break;
  }
}

// Derivative expressed through the activation output.
inline Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& out,
                                       Activation a) {
  switch (a) {
    case Activation::relu:
      return (out.array() > 0.0).cast<double>().matrix();
    case Activation::tanh:
      return (1.0 - out.array().square()).matrix();
    case Activation::sigmoid:
      return (out.array() * (1.0 - out.array())).matrix();
  }
  return out;
}

}  // namespace detail

// Class-1 probabilities; logits clamped to +-kLogitClamp so outputs stay in
// (0,1) and the BCE below stays finite.
inline Eigen::VectorXd forward(const NetworkSpec& spec,
                               const NetworkParams& params,
                               const Eigen::MatrixXd& X) {
  Eigen::MatrixXd a = X;
  for (std::size_t l = 0; l < params.W.size(); ++l) {
    Eigen::MatrixXd z =
        (a * params.W[l]).rowwise() + params.b[l].transpose();
    if (l + 1 < params.W.size())
      detail::apply_activation(z, spec.activations[l]);
    else
      z = (1.0 / (1.0 +
                  (-z.array().min(kLogitClamp).max(-kLogitClamp)).exp()))
              .matrix();
    a = std::move(z);
  }
  return a.col(0);
}

inline std::vector<double> forward(const NetworkSpec& spec,
                                   const NetworkParams& params,
                                   const std::vector<std::vector<double>>& X) {
  Eigen::MatrixXd M(X.size(), X.empty() ? 0 : X.front().size());
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X.front().size(); ++j) M(i, j) = X[i][j];
  Eigen::VectorXd p = forward(spec, params, M);
  return std::vector<double>(p.data(), p.data() + p.size());
}

inline double bce_loss(const Eigen::VectorXd& p, const Eigen::VectorXd& y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    loss -= y(i) * std::log(p(i)) + (1.0 - y(i)) * std::log(1.0 - p(i));
  return loss / static_cast<double>(p.size());
}

struct NetworkGradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
  double loss = 0.0;
};

// Backprop of mean BCE over the batch.
inline NetworkGradients compute_gradients(const NetworkSpec& spec,
                                          const NetworkParams& params,
                                          const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y) {
  std::size_t L = params.W.size();
  std::vector<Eigen::MatrixXd> acts(L + 1);
  acts[0] = X;
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd z =
        (acts[l] * params.W[l]).rowwise() + params.b[l].transpose();
    if (l + 1 < L)
      detail::apply_activation(z, spec.activations[l]);
    else
      z = (1.0 / (1.0 +
                  (-z.array().min(kLogitClamp).max(-kLogitClamp)).exp()))
              .matrix();
    acts[l + 1] = std::move(z);
  }
  double m = static_cast<double>(X.rows());
  NetworkGradients g;
  g.dW.resize(L);
  g.db.resize(L);
  g.loss = bce_loss(acts[L].col(0), y);

  // Output: dL/dz = (p - y)/m for sigmoid + BCE.
  Eigen::MatrixXd delta = (acts[L].col(0) - y) / m;
  for (std::size_t l = L; l-- > 0;) {
    g.dW[l] = acts[l].transpose() * delta;
    g.db[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = (delta * params.W[l].transpose())
                  .cwiseProduct(detail::activation_grad(acts[l],
                                                        spec.activations[l - 1]));
    }
  }
  return g;
}

struct TrainResult {
  NetworkParams params;  // best-monitored parameters
  int best_epoch = -1;
  double best_monitor_loss = 0.0;
};

// Mini-batch BCE training with an internal stratified 80/20 monitor split
// and early stopping (patience 10 epochs on the monitor loss).
inline TrainResult train(const NetworkSpec& spec, NetworkParams params,
                         const std::vector<std::vector<double>>& X_train,
                         const std::vector<int>& y_train, int patience = 10) {
  spec.validate();
  std::size_t n = X_train.size();
  std::size_t n_pos = std::count(y_train.begin(), y_train.end(), 1);
  if (n_pos == 0 || n_pos == n) throw DataError("train: both classes required");
  std::size_t d = X_train.front().size();

  Rng rng(derive_seed(spec.seed, "train"));
  // Stratified 80/20 fit/monitor partition of the provided rows.
  std::vector<std::size_t> fit_rows, mon_rows;
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (y_train[i] == cls) rows.push_back(i);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::size_t n_mon = std::max<std::size_t>(1, rows.size() / 5);
    for (std::size_t i = 0; i < rows.size(); ++i)
      (i < n_mon ? mon_rows : fit_rows).push_back(rows[i]);
  }

  auto to_matrix = [&](const std::vector<std::size_t>& rows,
                       Eigen::MatrixXd& M, Eigen::VectorXd& v) {
    M.resize(rows.size(), d);
    v.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) M(i, j) = X_train[rows[i]][j];
      v(i) = y_train[rows[i]];
    }
  };
  Eigen::MatrixXd Xf, Xm;
  Eigen::VectorXd yf, ym;
  to_matrix(fit_rows, Xf, yf);
  to_matrix(mon_rows, Xm, ym);

  // Optimizer state per parameter tensor.
  std::vector<Eigen::MatrixXd> vel_W, acc_W;
  std::vector<Eigen::VectorXd> vel_b, acc_b;
  for (std::size_t l = 0; l < params.W.size(); ++l) {
    vel_W.push_back(Eigen::MatrixXd::Zero(params.W[l].rows(),
                                          params.W[l].cols()));
    acc_W.push_back(Eigen::MatrixXd::Zero(params.W[l].rows(),
                                          params.W[l].cols()));
    vel_b.push_back(Eigen::VectorXd::Zero(params.b[l].size()));
    acc_b.push_back(Eigen::VectorXd::Zero(params.b[l].size()));
  }
  const double momentum = 0.9, eps = 1e-8;

  auto step = [&](std::size_t l, const Eigen::MatrixXd& dW,
                  const Eigen::VectorXd& db) {
    switch (spec.optimizer) {
      case Optimizer::sgd:
        params.W[l] -= spec.learning_rate * dW;
        params.b[l] -= spec.learning_rate * db;
        break;
      case Optimizer::momentum:
        vel_W[l] = momentum * vel_W[l] + dW;
        vel_b[l] = momentum * vel_b[l] + db;
        params.W[l] -= spec.learning_rate * vel_W[l];
        params.b[l] -= spec.learning_rate * vel_b[l];
        break;
      case Optimizer::adaptive:  // per-parameter accumulated step (AdaGrad)
        acc_W[l] += dW.cwiseProduct(dW);
        acc_b[l] += db.cwiseProduct(db);
        params.W[l] -= spec.learning_rate *
                       dW.cwiseQuotient(
                           (acc_W[l].array().sqrt() + eps).matrix());
        params.b[l] -= spec.learning_rate *
                       db.cwiseQuotient(
                           (acc_b[l].array().sqrt() + eps).matrix());
        break;
    }
  };

  TrainResult result;
  NetworkParams best = params;
  double best_loss = bce_loss(forward(spec, params, Xm), ym);
  int best_epoch = -1;  // -1: the initial parameters
  int since_best = 0;

  std::vector<std::size_t> order(fit_rows.size());
  std::iota(order.begin(), order.end(), 0);
  int bs = std::max(1, spec.batch_size);

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t off = 0; off < order.size();
         off += static_cast<std::size_t>(bs)) {
      std::size_t len = std::min<std::size_t>(bs, order.size() - off);
      Eigen::MatrixXd Xb(len, d);
      Eigen::VectorXd yb(len);
      for (std::size_t i = 0; i < len; ++i) {
        Xb.row(i) = Xf.row(static_cast<Eigen::Index>(order[off + i]));
        yb(i) = yf(static_cast<Eigen::Index>(order[off + i]));
      }
      NetworkGradients g = compute_gradients(spec, params, Xb, yb);
      if (!std::isfinite(g.loss))
        throw InternalError("training diverged at epoch " +
                            std::to_string(epoch));
      for (std::size_t l = 0; l < params.W.size(); ++l)
        step(l, g.dW[l], g.db[l]);
    }
    double mon = bce_loss(forward(spec, params, Xm), ym);
    if (!std::isfinite(mon))
      throw InternalError("training diverged at epoch " +
                          std::to_string(epoch));
    params.epoch_loss.push_back(mon);
    if (mon < best_loss) {
      best_loss = mon;
      best = params;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= patience) {
      break;
    }
  }
  best.epoch_loss = params.epoch_loss;
  result.params = std::move(best);
  result.best_epoch = best_epoch;
  result.best_monitor_loss = best_loss;
  return result;
}

// Magnitude saliency through the first min(max_layers, L) layers:
//   s = |W1| |W2| ... |Wm| 1,   weight_f = s_f / sum(s).
inline std::vector<double> extract_feature_weights(const NetworkParams& params,
                                                   int max_layers = 5) {
  if (params.W.empty()) throw DataError("no trained layers");
  std::size_t m = std::min<std::size_t>(max_layers, params.W.size());
  Eigen::MatrixXd prod = params.W[0].cwiseAbs();
  for (std::size_t l = 1; l < m; ++l) prod = prod * params.W[l].cwiseAbs();
  Eigen::VectorXd s = prod.rowwise().sum();
  double total = s.sum();
  std::vector<double> out(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    out[i] = total > 0.0 ? s(i) / total : 1.0 / s.size();
  return out;
}

}  // namespace sxi

#endif  // SXI_NETWORK_HPP
