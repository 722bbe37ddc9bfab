#pragma once

// Adjoint state of the tracking problem,
//
//   z(t) = r2 (T-t)^{a-1} E_{a,a}(lambda (T-t)^a) g
//        + r1 int_t^T (s-t)^{a-1} E_{a,a}(lambda (s-t)^a) (p_omega y(s) - chi*_omega y_d(s)) ds,
//
// with g = p_omega y(T) - chi*_omega y_dT. The first term blows up at t = T
// for a < 1, so z is returned as a regular part on every node plus the
// coefficient r2 g of the singular kernel.
//
// Two discretizations are produced:
//   * nodal values: the mismatch is taken piecewise constant per step
//     (midpoint average) and convolved with exact kernel moments;
//   * step means: the average of z over each step, with the mismatch
//     integrated by the same trapezoid rule the cost functional uses. These
//     are exactly (1/h) dJ_h/du_j of the discrete cost, which is what the
//     optimizer needs.

#include <Eigen/Core>
#include <vector>

#include "fractrack/forward_solver.hpp"
#include "fractrack/spectral_basis.hpp"

namespace fractrack {

struct CostWeights {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 1.0;

  // Throws ValidationError unless r1 >= 0, r2 >= 0, r3 > 0.
  void validate() const;

  bool operator==(const CostWeights&) const = default;
};

// Region targets expressed in the basis.
struct TrackingData {
  Region region;
  Eigen::MatrixXd gram;
  // Row i: coefficients of chi*_omega y_d(., t_i); (n_steps + 1) x n_modes.
  Eigen::MatrixXd desired;
  // ||y_d(., t_i)||^2 over the region, one per node.
  std::vector<double> desired_norm_sq;
  // Coefficients of chi*_omega y_dT and its squared region norm.
  Eigen::VectorXd terminal;
  double terminal_norm_sq = 0.0;

  // Zero targets on the given region (used for the homogeneous linear part).
  static TrackingData zero_targets(const TrackingData& like);
};

struct AdjointState {
  // Regular part on the nodes; the singular term is kept out (see nodal_value()).
  ModalTrajectory regular;
  // r2 g: multiplies (T - t)^{a-1} E_{a,a}(lambda_k (T - t)^a) per mode.
  Eigen::VectorXd singular;
  // Average of z over each step (includes the singular term, integrated exactly).
  ModalTrajectory step_mean;

  // Full z at node i < n_steps; throws DomainError at the terminal node for a < 1.
  double nodal_value(const PropagatorTable& table, int i, int mode) const;
};

// p_omega y(t_i) - chi*_omega y_d(t_i) on every node.
Eigen::MatrixXd tracking_mismatch(const ModalTrajectory& y, const TrackingData& data);

AdjointState solve_adjoint(const PropagatorTable& table, const SpectralBasis& basis,
                           const ModalTrajectory& y, const TrackingData& data,
                           const CostWeights& weights);

AdjointState solve_adjoint(const SpectralBasis& basis, const ModalTrajectory& y,
                           const TrackingData& data, const CostWeights& weights, double alpha);

struct DualityTerms {
  double tracking = 0.0;  // r1 int (p y_r - y_d) . (y_u - y_r)
  double terminal = 0.0;  // r2 (p y_r(T) - y_dT) . (y_u(T) - y_r(T))
  double control = 0.0;   // int z . (u - u_r)
  double residual() const;
  double scale() const;
};

// Adjoint identity check using the nodal (mild-solution) adjoint: regular part
// by the trapezoid rule on each step, singular part by its exact step moments.
DualityTerms duality_terms(const PropagatorTable& table, const ModalTrajectory& y_r,
                           const ModalTrajectory& y_u, const ModalTrajectory& u_r,
                           const ModalTrajectory& u, const AdjointState& z,
                           const TrackingData& data, const CostWeights& weights);

double duality_residual(const PropagatorTable& table, const ModalTrajectory& y_r,
                        const ModalTrajectory& y_u, const ModalTrajectory& u_r,
                        const ModalTrajectory& u, const AdjointState& z, const TrackingData& data,
                        const CostWeights& weights);

}  // namespace fractrack
