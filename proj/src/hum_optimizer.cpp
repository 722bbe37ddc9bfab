#include "fractrack/hum_optimizer.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "fractrack/errors.hpp"

namespace fractrack {

TrackingProblem TrackingProblem::make(SpectralBasis basis, TimeGrid grid, double alpha,
                                      SpectralField y0, TrackingData data, CostWeights weights) {
  weights.validate();
  if (y0.n_modes() != basis.n_modes()) throw DomainError("initial state has the wrong mode count");
  if (data.desired.rows() != grid.n_nodes() || data.desired.cols() != basis.n_modes() ||
      data.gram.rows() != basis.n_modes() || data.terminal.size() != basis.n_modes() ||
      static_cast<int>(data.desired_norm_sq.size()) != grid.n_nodes())
    throw DomainError("tracking data does not match the basis and grid");
  auto table = PropagatorTable::build(basis, alpha, grid);
  return TrackingProblem{std::move(basis), grid,  alpha, std::move(y0), std::move(data),
                         weights,          std::move(table)};
}

ModalTrajectory TrackingProblem::forward(const ModalTrajectory& control) const {
  return solve_forward(*table, y0, control);
}

AdjointState TrackingProblem::adjoint(const ModalTrajectory& state) const {
  return solve_adjoint(*table, basis, state, data, weights);
}

namespace {

// ||chi y - y_d||^2 over the region from the modal quadratic form; small
// negative values are round-off.
double region_error_sq(const Eigen::VectorXd& y, const Eigen::MatrixXd& gram,
                       const Eigen::VectorXd& target, double target_norm_sq) {
  const double q = gram_inner(y, gram, y) - 2.0 * y.dot(target) + target_norm_sq;
  return std::max(q, 0.0);
}

}  // namespace

std::vector<double> region_errors(const ModalTrajectory& y, const TrackingData& data) {
  std::vector<double> e(static_cast<std::size_t>(y.n_rows()));
  for (int i = 0; i < y.n_rows(); ++i)
    e[static_cast<std::size_t>(i)] = std::sqrt(
        region_error_sq(y.coefficients.row(i).transpose(), data.gram,
                        data.desired.row(i).transpose(), data.desired_norm_sq[static_cast<std::size_t>(i)]));
  return e;
}

double terminal_error(const ModalTrajectory& y, const TrackingData& data) {
  return std::sqrt(region_error_sq(y.coefficients.row(y.n_rows() - 1).transpose(), data.gram,
                                   data.terminal, data.terminal_norm_sq));
}

CostBreakdown evaluate_cost(const ModalTrajectory& y, const ModalTrajectory& u,
                            const TrackingData& data, const CostWeights& weights) {
  const TimeGrid& grid = y.grid;
  check_shape(y, grid, y.n_modes(), Sampling::nodes);
  check_shape(u, grid, y.n_modes(), Sampling::steps);
  if (data.desired.rows() != y.n_rows() || data.desired.cols() != y.n_modes())
    throw DomainError("tracking data and trajectory shapes disagree");
  const int n = grid.n_steps;
  const double h = grid.step();

  CostBreakdown c;
  if (weights.r1 != 0.0) {
    double s = 0.0;
    for (int i = 0; i <= n; ++i)
      s += grid.trapezoid_weight(i) *
           region_error_sq(y.coefficients.row(i).transpose(), data.gram,
                           data.desired.row(i).transpose(), data.desired_norm_sq[static_cast<std::size_t>(i)]);
    c.tracking = 0.5 * weights.r1 * h * s;
  }
  if (weights.r2 != 0.0) {
    c.terminal = 0.5 * weights.r2 *
                 region_error_sq(y.coefficients.row(n).transpose(), data.gram, data.terminal,
                                 data.terminal_norm_sq);
  }
  c.control = 0.5 * weights.r3 * h * u.coefficients.squaredNorm();
  c.total = c.tracking + c.terminal + c.control;
  return c;
}

double cost(const TrackingProblem& problem, const ModalTrajectory& u) {
  return evaluate_cost(problem.forward(u), u, problem.data, problem.weights).total;
}

ModalTrajectory control_update(const TrackingProblem& problem, const ModalTrajectory& u) {
  const AdjointState z = problem.adjoint(problem.forward(u));
  ModalTrajectory out = z.step_mean;
  out.coefficients *= -1.0 / problem.weights.r3;
  return out;
}

namespace {

ModalTrajectory linear_update(const TrackingProblem& problem, const TrackingData& zero,
                              const ModalTrajectory& u) {
  const ModalTrajectory y =
      solve_forward(*problem.table, SpectralField::zero(problem.n_modes()), u);
  ModalTrajectory out = solve_adjoint(*problem.table, problem.basis, y, zero, problem.weights).step_mean;
  out.coefficients *= -1.0 / problem.weights.r3;
  return out;
}

}  // namespace

ModalTrajectory control_update_linear(const TrackingProblem& problem, const ModalTrajectory& u) {
  return linear_update(problem, TrackingData::zero_targets(problem.data), u);
}

double variational_residual(const TrackingProblem& problem, const ModalTrajectory& u) {
  const AdjointState z = problem.adjoint(problem.forward(u));
  ModalTrajectory r = z.step_mean;
  r.coefficients += problem.weights.r3 * u.coefficients;
  return r.l2_norm();
}

double free_adjoint_norm(const TrackingProblem& problem) {
  return problem.adjoint(problem.forward(problem.zero_control())).step_mean.l2_norm();
}

std::string_view to_string(Method m) { return m == Method::direct ? "direct" : "fixed_point"; }

namespace {

void finish_report(const TrackingProblem& problem, OptimizationReport& r, double tolerance) {
  r.state = problem.forward(r.control);
  r.cost = evaluate_cost(r.state, r.control, problem.data, problem.weights);
  const AdjointState z = problem.adjoint(r.state);
  ModalTrajectory res = z.step_mean;
  res.coefficients += problem.weights.r3 * r.control.coefficients;
  r.variational_residual = res.l2_norm();
  r.residual_tolerance = tolerance;
}

double residual_tolerance(const TrackingProblem& problem) {
  return 1e-6 * free_adjoint_norm(problem);
}

}  // namespace

OptimizationReport solve_fixed_point(const TrackingProblem& problem,
                                     const FixedPointOptions& options) {
  const CostWeights& w = problem.weights;
  double theta = options.relaxation;
  if (theta <= 0.0) theta = std::min(1.0, w.r3 / (w.r1 + w.r2 + w.r3));
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("relaxation must lie in (0, 1]");

  OptimizationReport r;
  r.method = Method::fixed_point;
  r.relaxation = theta;
  r.control = problem.zero_control();
  const double tol_res = residual_tolerance(problem);

  bool small_update = false;
  for (int it = 1; it <= options.max_iter; ++it) {
    ModalTrajectory next = control_update(problem, r.control);
    next.coefficients = (1.0 - theta) * r.control.coefficients + theta * next.coefficients;
    const double diff = (next.coefficients - r.control.coefficients).norm() * std::sqrt(problem.grid.step());
    const double size = next.l2_norm();
    r.control = std::move(next);
    r.iterations = it;
    r.last_update = diff;
    if (!std::isfinite(diff)) break;
    if (diff <= options.tol * std::max(size, 1e-300) || diff == 0.0) {
      small_update = true;
      break;
    }
  }
  finish_report(problem, r, tol_res);
  r.converged = small_update && r.variational_residual <= tol_res;
  std::ostringstream os;
  if (r.converged)
    os << "fixed point converged after " << r.iterations << " iterations";
  else if (small_update)
    os << "fixed point stagnated after " << r.iterations
       << " iterations: updates are below tolerance but the optimality residual is "
       << r.variational_residual << " (tolerance " << tol_res << ")";
  else
    os << "fixed point did not converge in " << r.iterations << " iterations (relaxation "
       << theta << ", last update " << r.last_update << ")";
  r.diagnostics = os.str();
  return r;
}

OptimizationReport solve_direct(const TrackingProblem& problem) {
  const int modes = problem.n_modes();
  const int steps = problem.grid.n_steps;
  const long n_unknowns = static_cast<long>(modes) * steps;
  if (n_unknowns > kMaxDirectUnknowns) {
    std::ostringstream os;
    os << "direct solve needs " << n_unknowns << " unknowns, limit is " << kMaxDirectUnknowns;
    throw SolverError(os.str());
  }
  const auto n = static_cast<Eigen::Index>(n_unknowns);

  // Unknown (mode m, step j) sits at m * steps + j, matching the column-major
  // storage of a step trajectory.
  auto flat = [n](const ModalTrajectory& t) { return Eigen::Map<const Eigen::VectorXd>(t.coefficients.data(), n); };

  const TrackingData zero = TrackingData::zero_targets(problem.data);
  Eigen::MatrixXd system(n, n);
  auto assemble = [&](Eigen::Index first, Eigen::Index last) {
    ModalTrajectory unit = problem.zero_control();
    for (Eigen::Index c = first; c < last; ++c) {
      unit.coefficients.data()[c] = 1.0;
      const ModalTrajectory col = linear_update(problem, zero, unit);
      unit.coefficients.data()[c] = 0.0;
      system.col(c) = -flat(col);
      system(c, c) += 1.0;
    }
  };
  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  if (workers == 1) {
    assemble(0, n);
  } else {
    std::vector<std::jthread> pool;
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
      const Eigen::Index first = t * chunk;
      const Eigen::Index last = std::min<Eigen::Index>(n, first + chunk);
      if (first < last) pool.emplace_back(assemble, first, last);
    }
  }
  // Exact arithmetic gives a symmetric matrix; remove the round-off asymmetry.
  system = 0.5 * (system + system.transpose()).eval();

  const ModalTrajectory rho = control_update(problem, problem.zero_control());
  const Eigen::VectorXd rhs = flat(rho);

  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success)
    throw SolverError("optimality system is not positive definite; the discretization is inconsistent");

  Eigen::VectorXd x = llt.solve(rhs);
  OptimizationReport r;
  r.method = Method::direct;
  r.unknowns = static_cast<int>(n);
  for (int step = 0; step < 2; ++step) {
    const Eigen::VectorXd res = rhs - system * x;
    if (res.norm() <= 1e-15 * rhs.norm()) break;
    x += llt.solve(res);
    ++r.refinement_steps;
  }
  r.linear_residual = (rhs - system * x).norm() / std::max(rhs.norm(), 1e-300);

  r.control = problem.zero_control();
  Eigen::Map<Eigen::VectorXd>(r.control.coefficients.data(), n) = x;
  finish_report(problem, r, residual_tolerance(problem));
  r.converged = r.variational_residual <= r.residual_tolerance;
  std::ostringstream os;
  os << "Cholesky solve of " << n << " unknowns, relative linear residual " << r.linear_residual
     << ", " << r.refinement_steps << " refinement step(s)";
  r.diagnostics = os.str();
  return r;
}

GradientCheckReport gradient_check(const TrackingProblem& problem, const ModalTrajectory& u,
                                   const ModalTrajectory& direction,
                                   const std::vector<double>& steps) {
  if (steps.empty()) throw DomainError("gradient check needs at least one step");
  if (direction.coefficients.norm() == 0.0) throw DomainError("gradient check direction is zero");
  const double h = problem.grid.step();
  const AdjointState z = problem.adjoint(problem.forward(u));

  GradientCheckReport rep;
  const double control_part =
      h * problem.weights.r3 * u.coefficients.cwiseProduct(direction.coefficients).sum();
  const double adjoint_part = h * z.step_mean.coefficients.cwiseProduct(direction.coefficients).sum();
  rep.analytic = control_part + adjoint_part;
  rep.scale = std::max({std::abs(rep.analytic), std::abs(control_part), std::abs(adjoint_part)});
  ModalTrajectory plus = u, minus = u;
  for (double s : steps) {
    plus.coefficients = u.coefficients + s * direction.coefficients;
    minus.coefficients = u.coefficients - s * direction.coefficients;
    const double fd = (cost(problem, plus) - cost(problem, minus)) / (2.0 * s);
    rep.steps.push_back(s);
    rep.central_differences.push_back(fd);
    const double err = std::abs(fd - rep.analytic) / std::max(rep.scale, 1e-300);
    rep.relative_errors.push_back(err);
    rep.max_relative_error = std::max(rep.max_relative_error, err);
  }
  if (rep.steps.size() >= 2) {
    const std::size_t a = rep.steps.size() - 2, b = rep.steps.size() - 1;
    const double ea = rep.relative_errors[a], eb = rep.relative_errors[b];
    if (ea > 0.0 && eb > 0.0)
      rep.observed_order = std::log(ea / eb) / std::log(rep.steps[a] / rep.steps[b]);
  }
  return rep;
}

}  // namespace fractrack
