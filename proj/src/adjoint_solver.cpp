#include "fractrack/adjoint_solver.hpp"

#include <cmath>
#include <sstream>

#include "fractrack/errors.hpp"
#include "fractrack/kernels.hpp"

namespace fractrack {

void CostWeights::validate() const {
  if (!(r1 >= 0.0)) throw ValidationError("weight r1 must be non-negative");
  if (!(r2 >= 0.0)) throw ValidationError("weight r2 must be non-negative");
  if (!(r3 > 0.0)) throw ValidationError("weight r3 must be strictly positive");
}

TrackingData TrackingData::zero_targets(const TrackingData& like) {
  TrackingData z;
  z.region = like.region;
  z.gram = like.gram;
  z.desired = Eigen::MatrixXd::Zero(like.desired.rows(), like.desired.cols());
  z.desired_norm_sq.assign(like.desired_norm_sq.size(), 0.0);
  z.terminal = Eigen::VectorXd::Zero(like.terminal.size());
  z.terminal_norm_sq = 0.0;
  return z;
}

double AdjointState::nodal_value(const PropagatorTable& table, int i, int mode) const {
  const int n = table.grid().n_steps;
  if (i == n) {
    if (table.alpha() < 1.0 && singular[mode] != 0.0)
      throw DomainError("adjoint is singular at the terminal time");
    return regular.coefficients(i, mode) + singular[mode];
  }
  return regular.coefficients(i, mode) + singular[mode] * table.kernel()(n - i, mode);
}

Eigen::MatrixXd tracking_mismatch(const ModalTrajectory& y, const TrackingData& data) {
  if (y.n_modes() != data.gram.rows() || data.desired.rows() != y.n_rows() ||
      data.desired.cols() != y.n_modes())
    throw DomainError("tracking data and trajectory shapes disagree");
  // (G Y^T)^T = Y G since G is symmetric.
  Eigen::MatrixXd m = y.coefficients * data.gram;
  m -= data.desired;
  return m;
}

AdjointState solve_adjoint(const PropagatorTable& table, const SpectralBasis& basis,
                           const ModalTrajectory& y, const TrackingData& data,
                           const CostWeights& weights) {
  if (!basis.self_adjoint())
    throw UnsupportedConfiguration("only self-adjoint operators are supported by the adjoint solver");
  weights.validate();
  const TimeGrid& grid = table.grid();
  const int modes = table.n_modes();
  check_shape(y, grid, modes, Sampling::nodes);
  if (data.terminal.size() != modes) throw DomainError("terminal target has the wrong mode count");

  const int n = grid.n_steps;
  const double h = grid.step();
  const Eigen::MatrixXd mismatch = tracking_mismatch(y, data);
  const Eigen::VectorXd g =
      data.gram * y.coefficients.row(n).transpose() - data.terminal;

  AdjointState z;
  z.regular = ModalTrajectory::zeros(grid, modes, Sampling::nodes);
  z.step_mean = ModalTrajectory::zeros(grid, modes, Sampling::steps);
  z.singular = weights.r2 * g;

  const auto& kern = kernels::active();
  std::vector<double> v(static_cast<std::size_t>(n + 1));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int m = 0; m < modes; ++m) {
    const double* w = table.step_weights().col(m).data();

    if (weights.r1 != 0.0) {
      // Nodal: piecewise-constant (midpoint) mismatch on each step.
      v[0] = 0.0;
      for (int i = 1; i <= n; ++i)
        v[static_cast<std::size_t>(i)] = 0.5 * (mismatch(i - 1, m) + mismatch(i, m));
      kern.anticausal_correlation(w, v.data(), out.data(), static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) z.regular.coefficients(i, m) = weights.r1 * out[static_cast<std::size_t>(i)];

      // Step means: trapezoid-weighted mismatch.
      for (int i = 0; i <= n; ++i)
        v[static_cast<std::size_t>(i)] = grid.trapezoid_weight(i) * mismatch(i, m);
      kern.anticausal_correlation(w, v.data(), out.data(), static_cast<std::size_t>(n));
      for (int j = 0; j < n; ++j) z.step_mean.coefficients(j, m) = weights.r1 * out[static_cast<std::size_t>(j)];
    }
    if (z.singular[m] != 0.0) {
      const double s = z.singular[m] / h;
      for (int j = 0; j < n; ++j) z.step_mean.coefficients(j, m) += s * w[n - j];
    }
  }
  return z;
}

AdjointState solve_adjoint(const SpectralBasis& basis, const ModalTrajectory& y,
                           const TrackingData& data, const CostWeights& weights, double alpha) {
  const auto table = PropagatorTable::build(basis, alpha, y.grid);
  return solve_adjoint(*table, basis, y, data, weights);
}

double DualityTerms::residual() const { return std::abs(tracking + terminal - control); }

double DualityTerms::scale() const {
  return std::max({std::abs(tracking), std::abs(terminal), std::abs(control)});
}

DualityTerms duality_terms(const PropagatorTable& table, const ModalTrajectory& y_r,
                           const ModalTrajectory& y_u, const ModalTrajectory& u_r,
                           const ModalTrajectory& u, const AdjointState& z,
                           const TrackingData& data, const CostWeights& weights) {
  const TimeGrid& grid = table.grid();
  const int modes = table.n_modes();
  check_shape(y_r, grid, modes, Sampling::nodes);
  check_shape(y_u, grid, modes, Sampling::nodes);
  check_shape(u_r, grid, modes, Sampling::steps);
  check_shape(u, grid, modes, Sampling::steps);
  const int n = grid.n_steps;
  const double h = grid.step();

  DualityTerms t;
  const Eigen::MatrixXd mismatch = tracking_mismatch(y_r, data);
  const Eigen::MatrixXd dy = y_u.coefficients - y_r.coefficients;
  for (int i = 0; i <= n; ++i)
    t.tracking += grid.trapezoid_weight(i) * mismatch.row(i).dot(dy.row(i));
  t.tracking *= weights.r1 * h;

  const Eigen::VectorXd g = data.gram * y_r.coefficients.row(n).transpose() - data.terminal;
  t.terminal = weights.r2 * g.dot(dy.row(n).transpose());

  const Eigen::MatrixXd du = u.coefficients - u_r.coefficients;
  const Eigen::MatrixXd& w = table.step_weights();
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < modes; ++m) {
      const double regular =
          0.5 * h * (z.regular.coefficients(j, m) + z.regular.coefficients(j + 1, m));
      const double singular = z.singular[m] * w(n - j, m);
      t.control += du(j, m) * (regular + singular);
    }
  }
  return t;
}

double duality_residual(const PropagatorTable& table, const ModalTrajectory& y_r,
                        const ModalTrajectory& y_u, const ModalTrajectory& u_r,
                        const ModalTrajectory& u, const AdjointState& z, const TrackingData& data,
                        const CostWeights& weights) {
  return duality_terms(table, y_r, y_u, u_r, u, z, data, weights).residual();
}

}  // namespace fractrack
