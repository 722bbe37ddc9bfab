#pragma once

// Unconstrained optimal tracking control.
//
// The discrete cost is
//
//   J_h(u) = r1/2 * h sum_i c_i ||chi_omega y_i - y_d(t_i)||^2_{L2(omega)}   (trapezoid in time)
//          + r2/2 * ||chi_omega y_n - y_dT||^2_{L2(omega)}
//          + r3/2 * h sum_j ||u_j||^2                                      (exact, u piecewise constant)
//
// and its gradient is h (r3 u_j + zbar_j), with zbar the step means of the
// adjoint. The optimality condition r3 u + zbar(u) = 0 is affine in u, so
// it can be solved either by the damped fixed-point iteration
// u <- (1 - theta) u + theta * (-zbar(u) / r3) or directly by assembling the
// (symmetric positive definite) linear system and factoring it.

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "fractrack/adjoint_solver.hpp"
#include "fractrack/forward_solver.hpp"
#include "fractrack/spectral_basis.hpp"

namespace fractrack {

// A fully discretized tracking problem.
struct TrackingProblem {
  SpectralBasis basis;
  TimeGrid grid;
  double alpha = 1.0;
  SpectralField y0;
  TrackingData data;
  CostWeights weights;
  std::shared_ptr<const PropagatorTable> table;

  static TrackingProblem make(SpectralBasis basis, TimeGrid grid, double alpha, SpectralField y0,
                              TrackingData data, CostWeights weights);

  int n_modes() const { return basis.n_modes(); }
  ModalTrajectory zero_control() const {
    return ModalTrajectory::zeros(grid, basis.n_modes(), Sampling::steps);
  }
  ModalTrajectory forward(const ModalTrajectory& control) const;
  AdjointState adjoint(const ModalTrajectory& state) const;
};

struct CostBreakdown {
  double total = 0.0;
  double tracking = 0.0;
  double terminal = 0.0;
  double control = 0.0;
};

CostBreakdown evaluate_cost(const ModalTrajectory& y, const ModalTrajectory& u,
                            const TrackingData& data, const CostWeights& weights);

double cost(const TrackingProblem& problem, const ModalTrajectory& u);

// ||chi_omega y(t_i) - y_d(t_i)||_{L2(omega)} per node.
std::vector<double> region_errors(const ModalTrajectory& y, const TrackingData& data);

// ||chi_omega y(T) - y_dT||_{L2(omega)}.
double terminal_error(const ModalTrajectory& y, const TrackingData& data);

// -(1/r3) zbar(u): one application of the optimality map.
ModalTrajectory control_update(const TrackingProblem& problem, const ModalTrajectory& u);

// Linear part of control_update (same map with y0 = 0 and zero targets).
ModalTrajectory control_update_linear(const TrackingProblem& problem, const ModalTrajectory& u);

// L2(Q) norm of r3 u + zbar(u).
double variational_residual(const TrackingProblem& problem, const ModalTrajectory& u);

// ||zbar(0)||_{L2(Q)}: adjoint of the uncontrolled system; the natural scale
// for variational residuals.
double free_adjoint_norm(const TrackingProblem& problem);

enum class Method { fixed_point, direct };
std::string_view to_string(Method m);

struct OptimizationReport {
  Method method = Method::direct;
  ModalTrajectory control;
  ModalTrajectory state;
  CostBreakdown cost;
  double variational_residual = 0.0;
  double residual_tolerance = 0.0;
  bool converged = false;
  // fixed point
  int iterations = 0;
  double relaxation = 0.0;
  double last_update = 0.0;
  // direct
  int unknowns = 0;
  int refinement_steps = 0;
  double linear_residual = 0.0;
  std::string diagnostics;
};

struct FixedPointOptions {
  // <= 0 selects min(1, r3 / (r1 + r2 + r3)).
  double relaxation = 0.0;
  int max_iter = 200;
  // Relative size of the last update.
  double tol = 1e-8;

  bool operator==(const FixedPointOptions&) const = default;
};

OptimizationReport solve_fixed_point(const TrackingProblem& problem,
                                     const FixedPointOptions& options = {});

// Largest system solve_direct accepts.
inline constexpr int kMaxDirectUnknowns = 20000;

OptimizationReport solve_direct(const TrackingProblem& problem);

struct GradientCheckReport {
  double analytic = 0.0;  // <r3 u + zbar(u), d>_{L2(Q)}
  // max(|analytic|, |<r3 u, d>|, |<zbar, d>|). Errors are relative to this, so
  // they stay meaningful near an optimum where the two parts cancel.
  double scale = 0.0;
  std::vector<double> steps;
  std::vector<double> central_differences;
  std::vector<double> relative_errors;
  double max_relative_error = 0.0;
  // log2 error ratio between consecutive steps; meaningless when errors are at round-off.
  double observed_order = 0.0;
};

// Throws DomainError for a zero direction or an empty step list.
GradientCheckReport gradient_check(const TrackingProblem& problem, const ModalTrajectory& u,
                                   const ModalTrajectory& direction,
                                   const std::vector<double>& steps);

}  // namespace fractrack
