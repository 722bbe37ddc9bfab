#pragma once

// Minimizer for a black-box quadratic f: R^n -> R that only evaluates f.
// Gradient and Hessian are recovered from f on the unit stencil (exact for a
// quadratic up to rounding), the stationary point is solved for, and a
// 3^n grid sweep around it at several spacings confirms nothing lower exists.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace brute {

struct Result {
  Eigen::VectorXd argmin;
  double value = 0.0;
  // largest improvement any grid neighbour achieved over argmin (<= 0 ideally)
  double best_neighbour_gain = 0.0;
  int evaluations = 0;
};

inline Result minimize_quadratic(const std::function<double(const Eigen::VectorXd&)>& f, int n) {
  Result r;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++r.evaluations;
    return f(x);
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const double f0 = eval(zero);
  Eigen::VectorXd g(n);
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = zero;
    e[i] = 1.0;
    const double fp = eval(e), fm = eval(-e);
    g[i] = 0.5 * (fp - fm);
    H(i, i) = fp + fm - 2.0 * f0;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd e = zero;
      e[i] = 1.0;
      e[j] = 1.0;
      H(i, j) = H(j, i) = eval(e) - f0 - g[i] - g[j] - 0.5 * (H(i, i) + H(j, j));
    }
  r.argmin = H.fullPivLu().solve(-g);
  r.value = eval(r.argmin);

  r.best_neighbour_gain = -INFINITY;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (double spacing : {1e-1, 1e-2, 1e-3, 1e-4}) {
    for (int code = 0; code < total; ++code) {
      if (code == total / 2) continue;  // the centre
      Eigen::VectorXd x = r.argmin;
      int c = code;
      for (int i = 0; i < n; ++i, c /= 3) x[i] += spacing * (c % 3 - 1);
      r.best_neighbour_gain = std::max(r.best_neighbour_gain, r.value - eval(x));
    }
  }
  return r;
}

}  // namespace brute
