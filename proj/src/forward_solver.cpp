#include "fractrack/forward_solver.hpp"

#include <cmath>
#include <sstream>

#include "fractrack/errors.hpp"
#include "fractrack/kernels.hpp"
#include "fractrack/mittag_leffler.hpp"

namespace fractrack {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    std::ostringstream os;
    os << "fractional order must lie in (0, 1], got " << alpha;
    throw DomainError(os.str());
  }
}

int expected_rows(const TimeGrid& grid, Sampling s) {
  return s == Sampling::nodes ? grid.n_nodes() : grid.n_steps;
}

}  // namespace

ModalTrajectory ModalTrajectory::zeros(const TimeGrid& grid, int n_modes, Sampling sampling) {
  ModalTrajectory t;
  t.grid = grid;
  t.sampling = sampling;
  t.coefficients = Eigen::MatrixXd::Zero(expected_rows(grid, sampling), n_modes);
  return t;
}

double ModalTrajectory::l2_norm() const {
  const double h = grid.step();
  double s = 0.0;
  for (int i = 0; i < n_rows(); ++i) {
    const double w = sampling == Sampling::steps ? 1.0 : grid.trapezoid_weight(i);
    s += w * coefficients.row(i).squaredNorm();
  }
  return std::sqrt(h * s);
}

void check_shape(const ModalTrajectory& t, const TimeGrid& grid, int n_modes, Sampling sampling) {
  if (!(t.grid == grid) || t.sampling != sampling || t.n_modes() != n_modes ||
      t.n_rows() != expected_rows(grid, sampling)) {
    std::ostringstream os;
    os << "trajectory shape " << t.n_rows() << "x" << t.n_modes() << " does not match grid ("
       << grid.n_steps << " steps) and " << n_modes << " modes";
    throw DomainError(os.str());
  }
}

std::shared_ptr<const PropagatorTable> PropagatorTable::build(const SpectralBasis& basis,
                                                              double alpha,
                                                              const TimeGrid& grid) {
  require_alpha(alpha);
  auto table = std::make_shared<PropagatorTable>();
  const int n = grid.n_steps;
  const int modes = basis.n_modes();
  const double h = grid.step();
  table->alpha_ = alpha;
  table->grid_ = grid;
  table->eigenvalues_.assign(basis.eigenvalues().begin(), basis.eigenvalues().end());
  table->free_.resize(n + 1, modes);
  table->weights_.resize(n + 1, modes);
  table->weights_rev_.resize(n + 1, modes);
  table->kernel_.resize(n + 1, modes);

  bool warn = false;
  const MlParams e_free{alpha, 1.0};
  const MlParams e_kernel{alpha, alpha};
  const MlParams e_moment{alpha, alpha + 1.0};
  std::vector<double> moment(static_cast<std::size_t>(n + 1));
  for (int k = 0; k < modes; ++k) {
    const double lambda = basis.eigenvalue(k);
    table->free_(0, k) = 1.0;
    table->kernel_(0, k) = 0.0;
    moment[0] = 0.0;
    for (int l = 1; l <= n; ++l) {
      const double s = l * h;
      const double sa = std::pow(s, alpha);
      const MlResult f = ml_evaluate(e_free, lambda * sa);
      const MlResult kv = ml_evaluate(e_kernel, lambda * sa);
      const MlResult mv = ml_evaluate(e_moment, lambda * sa);
      warn = warn || f.accuracy_warning || kv.accuracy_warning || mv.accuracy_warning;
      table->free_(l, k) = f.value;
      table->kernel_(l, k) = sa / s * kv.value;
      moment[static_cast<std::size_t>(l)] = sa * mv.value;
    }
    table->weights_(0, k) = 0.0;
    for (int l = 1; l <= n; ++l)
      table->weights_(l, k) = moment[static_cast<std::size_t>(l)] - moment[static_cast<std::size_t>(l - 1)];
    for (int p = 0; p <= n; ++p) table->weights_rev_(p, k) = table->weights_(n - p, k);
  }
  table->accuracy_warning_ = warn;
  return table;
}

ModalTrajectory propagate_free(const SpectralBasis& basis, const SpectralField& y0, double alpha,
                               const TimeGrid& grid) {
  require_alpha(alpha);
  if (y0.n_modes() != basis.n_modes()) throw DomainError("initial state has the wrong mode count");
  ModalTrajectory out = ModalTrajectory::zeros(grid, basis.n_modes(), Sampling::nodes);
  const MlParams e_free{alpha, 1.0};
  for (int k = 0; k < basis.n_modes(); ++k) {
    out.coefficients(0, k) = y0.coefficients[k];
    for (int i = 1; i <= grid.n_steps; ++i)
      out.coefficients(i, k) =
          ml(e_free, basis.eigenvalue(k) * std::pow(grid.node(i), alpha)) * y0.coefficients[k];
  }
  return out;
}

ModalTrajectory solve_forward(const PropagatorTable& table, const SpectralField& y0,
                              const ModalTrajectory& control) {
  const TimeGrid& grid = table.grid();
  const int modes = table.n_modes();
  if (y0.n_modes() != modes) throw DomainError("initial state has the wrong mode count");
  check_shape(control, grid, modes, Sampling::steps);

  const auto n = static_cast<std::size_t>(grid.n_steps);
  ModalTrajectory out = ModalTrajectory::zeros(grid, modes, Sampling::nodes);
  const auto& k = kernels::active();
  for (int m = 0; m < modes; ++m) {
    const double* u = control.coefficients.col(m).data();
    double* y = out.coefficients.col(m).data();
    bool has_control = false;
    for (std::size_t j = 0; j < n && !has_control; ++j) has_control = u[j] != 0.0;
    if (has_control) k.causal_convolution(table.step_weights_reversed().col(m).data(), u, y, n);
    const double y0m = y0.coefficients[m];
    if (y0m != 0.0) k.axpy(y0m, table.free().col(m).data(), y, n + 1);
  }
  return out;
}

ModalTrajectory solve_forward(const SpectralBasis& basis, const SpectralField& y0,
                              const ModalTrajectory& control, double alpha) {
  const auto table = PropagatorTable::build(basis, alpha, control.grid);
  return solve_forward(*table, y0, control);
}

double pde_residual(const SpectralBasis& basis, const ModalTrajectory& trajectory,
                    const ModalTrajectory& control, double alpha) {
  require_alpha(alpha);
  const TimeGrid& grid = trajectory.grid;
  check_shape(trajectory, grid, basis.n_modes(), Sampling::nodes);
  check_shape(control, grid, basis.n_modes(), Sampling::steps);
  const int n = grid.n_steps;
  const double h = grid.step();
  double worst = 0.0;
  for (int m = 0; m < basis.n_modes(); ++m) {
    std::vector<double> v(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) v[static_cast<std::size_t>(i)] = trajectory.coefficients(i, m);
    const TimeSeries d = caputo_left(TimeSeries(grid, std::move(v)), alpha);
    double s = 0.0;
    for (int i = 1; i < n; ++i) {
      const double r = d[i] - basis.eigenvalue(m) * trajectory.coefficients(i, m) -
                       control.coefficients(i - 1, m);
      s += r * r;
    }
    worst = std::max(worst, std::sqrt(h * s));
  }
  return worst;
}

}  // namespace fractrack
