#include <catch_amalgamated.hpp>

#include <random>

#include "sxi/learners.hpp"

using namespace sxi;
using Catch::Approx;

namespace {

using Matrix = std::vector<std::vector<double>>;

// Independent PCA oracle: power iteration with deflation on the centered
// covariance matrix, no Eigen involved.
struct PowerPca {
  Matrix loadings;  // [component][feature]
  std::vector<double> eigenvalues;
};

PowerPca power_iteration_pca(const Matrix& X, int n_components) {
  std::size_t n = X.size(), d = X.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& row : X)
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j] / n;
  Matrix cov(d, std::vector<double>(d, 0.0));
  for (const auto& row : X)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        cov[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]) / (n - 1);

  PowerPca out;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  for (int k = 0; k < n_components; ++k) {
    std::vector<double> v(d);
    for (double& x : v) x = g(rng);
    double lambda = 0.0;
    for (int iter = 0; iter < 20000; ++iter) {
      std::vector<double> w(d, 0.0);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) w[a] += cov[a][b] * v[b];
      double norm = 0.0;
      for (double x : w) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (std::size_t a = 0; a < d; ++a) w[a] /= norm;
      double delta = 0.0;
      for (std::size_t a = 0; a < d; ++a)
        delta = std::max(delta, std::abs(std::abs(w[a]) - std::abs(v[a])));
      v = w;
      lambda = norm;
      if (delta < 1e-13 && iter > 50) break;
    }
    out.loadings.push_back(v);
    out.eigenvalues.push_back(lambda);
    // Deflate: cov -= lambda v v^T
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov[a][b] -= lambda * v[a] * v[b];
  }
  return out;
}

std::vector<std::string> make_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

}  // namespace

TEST_CASE("make_algorithm_weights normalization and top5 ordering") {
  auto aw = make_algorithm_weights(LearnerKind::lasso, make_names(6),
                                   {0.5, -2.0, 0.0, 1.0, 1.0, 0.25});
  double sum = 0.0;
  for (double v : aw.normalized) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == Approx(1.0));
  CHECK(aw.normalized[1] == Approx(2.0 / 4.75));
  // |raw| desc, ties (f3, f4 both 1.0) by feature order.
  CHECK(aw.top5 == std::vector<int>{1, 3, 4, 0, 5});
}

TEST_CASE("make_algorithm_weights all-zero raw gives uniform") {
  auto aw = make_algorithm_weights(LearnerKind::mutual_info, make_names(4),
                                   {0, 0, 0, 0});
  for (double v : aw.normalized) CHECK(v == Approx(0.25));
}

TEST_CASE("fit_lasso_weights lambda=0 recovers OLS on y=2x") {
  Matrix X;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    double x = (i - 4.5) / 4.5;  // centered
    X.push_back({x});
    y.push_back(x > 0 ? 1 : 0);
  }
  // Use fit_lasso directly with a real-valued target y = 2x.
  std::vector<double> yr;
  for (const auto& row : X) yr.push_back(2.0 * row[0]);
  LassoFit fit = fit_lasso(X, yr, 0.0);
  CHECK(fit.coefficients[0] == Approx(2.0).margin(1e-6));
}

TEST_CASE("fit_lasso matches the soft-threshold oracle on orthonormal designs") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> lam(0.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    // Columns of a scaled Hadamard(4) matrix satisfy (1/n) X^T X = I.
    const double H[4][4] = {{1, 1, 1, 1},
                            {1, -1, 1, -1},
                            {1, 1, -1, -1},
                            {1, -1, -1, 1}};
    std::size_t n = 4, d = 3;
    Matrix X(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) X[i][j] = H[i][j + 1];
    std::vector<double> y(n);
    for (double& v : y) v = g(rng);
    double ym = (y[0] + y[1] + y[2] + y[3]) / 4.0;
    for (double& v : y) v -= ym;

    double lambda = lam(rng);
    LassoFit fit = fit_lasso(X, y, lambda);
    for (std::size_t j = 0; j < d; ++j) {
      double beta_ols = 0.0;
      for (std::size_t i = 0; i < n; ++i) beta_ols += X[i][j] * y[i];
      beta_ols /= n;
      REQUIRE(fit.coefficients[j] ==
              Approx(soft_threshold(beta_ols, lambda)).margin(1e-6));
    }
  }
}

TEST_CASE("complement NB: identical feature across classes weighs ~0") {
  Matrix X = {{1, 2}, {1, 5}, {1, 2}, {1, 5}};
  std::vector<int> y = {0, 0, 1, 1};
  auto aw = fit_complement_nb(X, y, make_names(2));
  // Feature 0 contributes equally to both complements; only the smoothing
  // denominators differ, and here those are symmetric too.
  CHECK(aw.raw[0] == Approx(0.0).margin(1e-12));
}

TEST_CASE("complement NB matches hand-computed smoothing arithmetic") {
  // Feature sums: f0 = 3 in positives / 1 in negatives; f1 the mirror.
  Matrix X = {{3, 1}, {1, 3}};
  std::vector<int> y = {1, 0};
  auto aw = fit_complement_nb(X, y, make_names(2));
  // Complement of pos = negatives: f0 sum 1, f1 sum 3, total 4, d=2.
  //   w_pos,f0 = log((1+1)/(4+2)) = log(2/6)
  // Complement of neg = positives: f0 sum 3, f1 sum 1.
  //   w_neg,f0 = log((3+1)/(4+2)) = log(4/6)
  double expect = std::abs(std::log(2.0 / 6.0) - std::log(4.0 / 6.0));
  CHECK(aw.raw[0] == Approx(expect));
  CHECK(aw.raw[1] == Approx(expect));  // exchangeable features, equal weight
  CHECK(expect == Approx(std::log(2.0)));
}

TEST_CASE("complement NB rejects negative input and single class") {
  CHECK_THROWS_AS(fit_complement_nb({{-1}, {1}}, {0, 1}, make_names(1)),
                  DataError);
  CHECK_THROWS_AS(fit_complement_nb({{1}, {1}}, {1, 1}, make_names(1)),
                  DataError);
}

TEST_CASE("gbt: perfectly separating feature dominates importance") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix X;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    int label = i % 2;
    X.push_back({label ? 1.0 + g(rng) * 0.01 : -1.0 + g(rng) * 0.01, g(rng),
                 g(rng)});
    y.push_back(label);
  }
  GbtModel model = fit_gbt(X, y);
  auto imp = model.importances();
  CHECK(imp[0] >= 0.9);
}

TEST_CASE("gbt: zero trees is the prior-only model with uniform importance") {
  Matrix X = {{0}, {1}, {2}, {3}};
  std::vector<int> y = {0, 0, 0, 1};
  GbtConfig cfg;
  cfg.n_trees = 0;
  GbtModel model = fit_gbt(X, y, cfg);
  CHECK(model.trees.empty());
  double prior = 1.0 / 4.0;
  CHECK(model.predict_prob({5.0}) == Approx(prior));
  auto imp = model.importances();
  CHECK(imp[0] == Approx(1.0));
}

TEST_CASE("gbt: pure children stop splitting") {
  // One clean separating feature: after the root split both children are
  // pure, so each tree is exactly root + two leaves despite depth 3.
  Matrix X;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    X.push_back({i < 20 ? 0.0 + i * 0.01 : 1.0 + i * 0.01});
    y.push_back(i < 20 ? 0 : 1);
  }
  GbtConfig cfg;
  cfg.n_trees = 2;
  GbtModel model = fit_gbt(X, y, cfg);
  for (const auto& tree : model.trees) CHECK(tree.nodes.size() == 3);
}

TEST_CASE("gbt training loss is non-increasing per round") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Matrix X;
  std::vector<int> y;
  for (int i = 0; i < 150; ++i) {
    int label = i % 3 == 0;
    X.push_back({g(rng) + label, g(rng), g(rng) - label});
    y.push_back(label);
  }
  GbtConfig cfg;
  cfg.n_trees = 30;
  GbtModel model = fit_gbt(X, y, cfg);
  for (std::size_t t2 = 1; t2 < model.train_loss.size(); ++t2)
    REQUIRE(model.train_loss[t2] <= model.train_loss[t2 - 1] + 1e-12);
}

TEST_CASE("mutual information: constant feature gives 0") {
  std::vector<double> x(100, 3.5);
  std::vector<int> y(100);
  for (int i = 0; i < 100; ++i) y[i] = i % 2;
  CHECK(mutual_information_single(x, y, 10) == 0.0);
}

TEST_CASE("mutual information: binary feature equal to y gives ln 2") {
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    y.push_back(i % 2);
    x.push_back(i % 2);
  }
  CHECK(mutual_information_single(x, y, 10) == Approx(std::log(2.0)));
}

TEST_CASE("mutual information is permutation invariant and nonnegative") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  std::vector<double> x(200);
  std::vector<int> y(200);
  for (int i = 0; i < 200; ++i) {
    x[i] = g(rng);
    y[i] = rng() % 2;
  }
  double base = mutual_information_single(x, y, 10);
  CHECK(base >= 0.0);
  std::vector<std::size_t> perm(200);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> xp(200);
  std::vector<int> yp(200);
  for (int i = 0; i < 200; ++i) {
    xp[i] = x[perm[i]];
    yp[i] = y[perm[i]];
  }
  CHECK(mutual_information_single(xp, yp, 10) == Approx(base));
}

TEST_CASE("pca axis cases") {
  // Variance only along feature 0.
  Matrix X1 = {{-2, 0}, {-1, 0}, {1, 0}, {2, 0}};
  PcaFit f1 = fit_pca_full(X1);
  CHECK(std::abs(f1.loadings(0, 0)) == Approx(1.0));
  CHECK(std::abs(f1.loadings(1, 0)) == Approx(0.0).margin(1e-12));

  // Sample covariance diag(2,1): independent axes with those variances.
  Matrix X2 = {{2, 0}, {-2, 0}, {0, std::sqrt(2.0)}, {0, -std::sqrt(2.0)},
               {0, 0}, {0, 0}};
  // cov = diag(8/5, 4/5)... simpler: construct exactly.
  Matrix X3 = {{std::sqrt(3.0), 0}, {-std::sqrt(3.0), 0},
               {0, std::sqrt(1.5)}, {0, -std::sqrt(1.5)}};
  PcaFit f3 = fit_pca_full(X3);  // cov = diag(2, 1)
  CHECK(f3.explained[0] == Approx(2.0));
  CHECK(f3.explained[1] == Approx(1.0));
  CHECK(std::abs(f3.loadings(0, 0)) == Approx(1.0));
}

TEST_CASE("pca matches the deflated power-iteration oracle") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t n = 60, d = 5;
    Matrix X(n, std::vector<double>(d));
    // Correlated columns via random linear mixing.
    Matrix mix(d, std::vector<double>(d));
    for (auto& row : mix)
      for (double& v : row) v = g(rng);
    for (auto& row : X) {
      std::vector<double> z(d);
      for (double& v : z) v = g(rng);
      for (std::size_t a = 0; a < d; ++a) {
        row[a] = 0.0;
        for (std::size_t b = 0; b < d; ++b) row[a] += mix[a][b] * z[b];
      }
    }
    PcaFit fit = fit_pca_full(X);
    PowerPca oracle = power_iteration_pca(X, 3);
    for (int k = 0; k < 3; ++k) {
      REQUIRE(fit.explained[k] == Approx(oracle.eigenvalues[k]).margin(1e-6));
      for (std::size_t j = 0; j < d; ++j)
        REQUIRE(std::abs(fit.loadings(j, k)) ==
                Approx(std::abs(oracle.loadings[k][j])).margin(1e-6));
    }
  }
}

TEST_CASE("pca loadings orthonormal, explained non-increasing") {
  std::mt19937_64 rng(66);
  std::normal_distribution<double> g;
  Matrix X(40, std::vector<double>(4));
  for (auto& row : X)
    for (double& v : row) v = g(rng);
  PcaFit fit = fit_pca_full(X);
  Eigen::MatrixXd gram = fit.loadings.transpose() * fit.loadings;
  CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
  for (std::size_t k = 1; k < fit.explained.size(); ++k)
    CHECK(fit.explained[k] <= fit.explained[k - 1] + 1e-12);
}

TEST_CASE("every learner emits normalized weights summing to 1") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t n = 120, d = 4;
  Matrix X(n, std::vector<double>(d));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i % 2;
    for (std::size_t j = 0; j < d; ++j)
      X[i][j] = u(rng) * 0.5 + (j == 0 ? 0.4 * y[i] : 0.0);
  }
  auto names = make_names(d);
  std::vector<AlgorithmWeights> all = {
      fit_lasso_weights(X, y, names),
      fit_complement_nb(X, y, names),
      fit_gbt_weights(X, y, names),
      mutual_information(X, y, names),
      fit_pca(X, names),
  };
  for (const auto& aw : all) {
    double sum = 0.0;
    for (double v : aw.normalized) {
      REQUIRE(v >= 0.0);
      sum += v;
    }
    REQUIRE(sum == Approx(1.0));
    REQUIRE(aw.top5.size() == std::min<std::size_t>(5, d));
  }

  auto set = composite_weights(all);
  double csum = 0.0;
  for (double v : set.composite) csum += v;
  CHECK(csum == Approx(1.0));

  // Order invariance of the composite.
  std::vector<AlgorithmWeights> shuffled = {all[3], all[0], all[4], all[1],
                                            all[2]};
  auto set2 = composite_weights(shuffled);
  for (std::size_t j = 0; j < d; ++j)
    CHECK(set.composite[j] == Approx(set2.composite[j]));
  CHECK(set.importance_counts == set2.importance_counts);
}

TEST_CASE("composite of a single algorithm is its normalized weights") {
  auto aw = make_algorithm_weights(LearnerKind::pca, make_names(3),
                                   {0.2, 0.3, 0.5});
  auto set = composite_weights({aw});
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(set.composite[j] == Approx(aw.normalized[j]));
  CHECK(set.retained.size() == 3);
}

TEST_CASE("composite excludes universally zero-weighted features") {
  auto a = make_algorithm_weights(LearnerKind::lasso, make_names(3),
                                  {1.0, 0.0, 2.0});
  auto b = make_algorithm_weights(LearnerKind::mutual_info, make_names(3),
                                  {0.5, 0.0, 0.5});
  auto set = composite_weights({a, b});
  CHECK(set.composite[1] == 0.0);
  CHECK(set.retained == std::vector<std::string>{"f0", "f2"});
}

TEST_CASE("top5_importance counting") {
  auto mk = [&](std::vector<int> top) {
    AlgorithmWeights aw;
    aw.top5 = std::move(top);
    return aw;
  };
  // f0 in 3 lists -> 4; f1 in none -> 1.
  auto counts = top5_importance({mk({0, 2}), mk({0}), mk({2, 0}), mk({3}),
                                 mk({2})},
                                4);
  CHECK(counts == std::vector<int>{4, 1, 4, 2});

  // d <= 5 and every feature in every list -> 1 + #algorithms.
  auto full = top5_importance({mk({0, 1}), mk({1, 0}), mk({0, 1})}, 2);
  CHECK(full == std::vector<int>{4, 4});
}

TEST_CASE("composite rejects empty or mismatched algorithm lists") {
  CHECK_THROWS_AS(composite_weights({}), DataError);
  auto a = make_algorithm_weights(LearnerKind::lasso, make_names(2), {1, 1});
  auto b = make_algorithm_weights(LearnerKind::pca, make_names(3), {1, 1, 1});
  CHECK_THROWS_AS(composite_weights({a, b}), DataError);
}
