#ifndef SXI_LASSO_HPP
#define SXI_LASSO_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "sxi/common.hpp"

namespace sxi {

struct LassoFit {
  std::vector<double> coefficients;
  double intercept = 0.0;
  int sweeps = 0;
  bool converged = false;
};

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Cyclic coordinate descent for
//   (1/2n) ||y - X b - b0||^2 + lambda ||b||_1
// X is row-major n x d. Converged when the max coefficient change in a
// sweep drops below `tol`.
inline LassoFit fit_lasso(const std::vector<std::vector<double>>& X,
                          const std::vector<double>& y, double lambda,
                          double tol = 1e-7, int max_sweeps = 10000) {
  std::size_t n = X.size();
  if (n < 2) throw DataError("lasso: need at least 2 rows");
  std::size_t d = X.front().size();
  for (const auto& row : X)
    for (double v : row)
      if (!std::isfinite(v)) throw DataError("lasso: non-finite input");
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("lasso: non-finite target");

  std::vector<double> col_sq(d, 0.0);  // (1/n) sum x_ij^2
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) col_sq[j] += X[i][j] * X[i][j];
  for (std::size_t j = 0; j < d; ++j) col_sq[j] /= static_cast<double>(n);

  LassoFit fit;
  fit.coefficients.assign(d, 0.0);
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  fit.intercept = y_mean;

  // residual r_i = y_i - intercept - sum_j x_ij b_j
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - fit.intercept;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (col_sq[j] == 0.0) continue;  // constant-zero column stays at 0
      double old = fit.coefficients[j];
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        rho += X[i][j] * (r[i] + X[i][j] * old);
      rho /= static_cast<double>(n);
      double updated = soft_threshold(rho, lambda) / col_sq[j];
      if (updated != old) {
        double delta = updated - old;
        for (std::size_t i = 0; i < n; ++i) r[i] -= X[i][j] * delta;
        fit.coefficients[j] = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    // Re-center the intercept against the current residual.
    double shift = 0.0;
    for (double v : r) shift += v;
    shift /= static_cast<double>(n);
    if (shift != 0.0) {
      fit.intercept += shift;
      for (double& v : r) v -= shift;
      max_delta = std::max(max_delta, std::abs(shift));
    }
    fit.sweeps = sweep + 1;
    if (max_delta < tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

}  // namespace sxi

#endif  // SXI_LASSO_HPP
