#pragma once

// Mild solution of  cD^a y = A y + u,  y(0) = y0  (Neumann BC), mode by mode:
//
//   y_k(t) = E_a(lambda_k t^a) y0_k + int_0^t (t - s)^{a-1} E_{a,a}(lambda_k (t - s)^a) u_k(s) ds.
//
// Controls are piecewise constant on the time steps. The kernel is integrated
// exactly over each step with
//
//   int_{t_j}^{t_{j+1}} (t_i - s)^{a-1} E_{a,a}(lambda (t_i - s)^a) ds = M(i - j) - M(i - j - 1),
//   M(l) = (l h)^a E_{a,a+1}(lambda (l h)^a),
//
// so the weak singularity at s = t never gets sampled.

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "fractrack/fractional_calculus.hpp"
#include "fractrack/spectral_basis.hpp"

namespace fractrack {

// Nodal trajectories have one row per grid node (state, adjoint); step
// trajectories have one row per step (piecewise-constant controls).
enum class Sampling { nodes, steps };

struct ModalTrajectory {
  TimeGrid grid;
  Sampling sampling = Sampling::nodes;
  // rows = time (nodes or steps), cols = modes; column-major, so each mode's
  // history is contiguous.
  Eigen::MatrixXd coefficients;

  static ModalTrajectory zeros(const TimeGrid& grid, int n_modes, Sampling sampling);

  int n_modes() const { return static_cast<int>(coefficients.cols()); }
  int n_rows() const { return static_cast<int>(coefficients.rows()); }
  SpectralField row(int i) const { return SpectralField(coefficients.row(i).transpose()); }

  // L2(Q) norm: step trajectories are integrated exactly, nodal ones with the trapezoid rule.
  double l2_norm() const;
};

// Throws DomainError when the trajectory shape does not match the grid/mode count.
void check_shape(const ModalTrajectory& t, const TimeGrid& grid, int n_modes, Sampling sampling);

// Mittag-Leffler values tabulated for one (basis, order, grid) triple. All
// kernels on a uniform grid depend only on the lag, so each mode needs O(n_steps)
// evaluations.
class PropagatorTable {
 public:
  // Throws DomainError for alpha outside (0, 1].
  static std::shared_ptr<const PropagatorTable> build(const SpectralBasis& basis, double alpha,
                                                      const TimeGrid& grid);

  double alpha() const { return alpha_; }
  const TimeGrid& grid() const { return grid_; }
  int n_modes() const { return static_cast<int>(free_.cols()); }

  // E_a(lambda_k t_i^a), (n_steps + 1) x n_modes.
  const Eigen::MatrixXd& free() const { return free_; }
  // Step weights w_k(l) = M_k(l) - M_k(l - 1), l = 0..n_steps (w_k(0) = 0).
  const Eigen::MatrixXd& step_weights() const { return weights_; }
  // w_k reversed, for the causal convolution kernel.
  const Eigen::MatrixXd& step_weights_reversed() const { return weights_rev_; }
  // (l h)^{a-1} E_{a,a}(lambda_k (l h)^a), l = 1..n_steps (row 0 unused).
  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  // True if any Mittag-Leffler evaluation raised an accuracy warning.
  bool accuracy_warning() const { return accuracy_warning_; }

 private:
  double alpha_ = 1.0;
  TimeGrid grid_;
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd free_;
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd weights_rev_;
  Eigen::MatrixXd kernel_;
  bool accuracy_warning_ = false;
};

ModalTrajectory propagate_free(const SpectralBasis& basis, const SpectralField& y0, double alpha,
                               const TimeGrid& grid);

ModalTrajectory solve_forward(const SpectralBasis& basis, const SpectralField& y0,
                              const ModalTrajectory& control, double alpha);

// Same, reusing a prebuilt table.
ModalTrajectory solve_forward(const PropagatorTable& table, const SpectralField& y0,
                              const ModalTrajectory& control);

// max_k sqrt(h sum_{interior i} r_{k,i}^2) with r = L1(y_k) - lambda_k y_k - u_k,
// where node i sees the control of the step ending there.
double pde_residual(const SpectralBasis& basis, const ModalTrajectory& trajectory,
                    const ModalTrajectory& control, double alpha);

}  // namespace fractrack
