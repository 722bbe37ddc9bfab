#include "fractrack/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "fractrack/errors.hpp"

namespace fractrack {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<double> uniform_points(double left, double right) {
  std::vector<double> x(kExportPoints);
  for (int i = 0; i < kExportPoints; ++i)
    x[static_cast<std::size_t>(i)] = left + (right - left) * i / (kExportPoints - 1);
  x.back() = right;
  return x;
}

std::string fmt(double v, int digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

// Evaluates modal rows on the export grid and writes "t,x,value".
template <class RowValues>
void write_grid(const fs::path& path, const TimeGrid& grid, const std::vector<double>& x,
                RowValues&& values) {
  std::ofstream out = open_out(path);
  out << "t,x,value\n";
  for (int i = 0; i <= grid.n_steps; ++i) {
    const std::vector<double> v = values(i);
    const std::string t = fmt(grid.node(i));
    for (std::size_t q = 0; q < x.size(); ++q) out << t << ',' << fmt(x[q]) << ',' << fmt(v[q]) << '\n';
  }
}

void write_state(const fs::path& path, const TrackingProblem& p, const ModalTrajectory& y) {
  const auto x = uniform_points(0.0, p.basis.length());
  write_grid(path, p.grid, x, [&](int i) { return synthesize(y.row(i), p.basis, x); });
}

json report_json(const OptimizationReport& r) {
  json d;
  d["method"] = std::string(to_string(r.method));
  d["converged"] = r.converged;
  d["message"] = r.diagnostics;
  if (r.method == Method::fixed_point) {
    d["iterations"] = r.iterations;
    d["relaxation"] = r.relaxation;
    d["last_update"] = r.last_update;
  } else {
    d["unknowns"] = r.unknowns;
    d["refinement_steps"] = r.refinement_steps;
    d["linear_residual"] = r.linear_residual;
  }
  return d;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace

TrackingMetrics tracking_metrics(const TrackingProblem& problem, const ModalTrajectory& state,
                                 const ModalTrajectory& control) {
  TrackingMetrics m;
  const std::vector<double> e = region_errors(state, problem.data);
  double sq = 0.0;
  for (int i = 0; i < static_cast<int>(e.size()); ++i) {
    m.trajectory_error_sup = std::max(m.trajectory_error_sup, e[static_cast<std::size_t>(i)]);
    sq += problem.grid.trapezoid_weight(i) * e[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(i)];
  }
  m.trajectory_error_l2 = std::sqrt(problem.grid.step() * sq);
  m.terminal_error = terminal_error(state, problem.data);
  m.control_norm = control.l2_norm();
  return m;
}

OptimizationReport optimize(const TrackingProblem& problem, Method method,
                            const FixedPointOptions& options) {
  return method == Method::direct ? solve_direct(problem) : solve_fixed_point(problem, options);
}

int run_optimize(const TrackingScenario& scenario, const fs::path& out_dir,
                 const RunOptions& options, std::ostream& log) {
  fs::create_directories(out_dir);
  const Method method = options.method.value_or(scenario.method);
  json summary;
  summary["scenario"] = scenario.name;
  summary["n_modes"] = scenario.n_modes;
  summary["n_steps"] = scenario.n_steps;
  summary["method"] = std::string(to_string(method));

  const TrackingProblem problem = build_problem(scenario);
  OptimizationReport r;
  try {
    r = optimize(problem, method, scenario.fixed_point);
  } catch (const SolverError& e) {
    summary["status"] = "error";
    summary["error"] = e.what();
    write_json(out_dir / "summary.json", summary);
    log << "solver failed: " << e.what() << '\n';
    return 2;
  }

  const TrackingMetrics m = tracking_metrics(problem, r.state, r.control);
  summary["status"] = r.converged ? "converged" : "not_converged";
  summary["cost"] = {{"total", r.cost.total},
                     {"tracking", r.cost.tracking},
                     {"terminal", r.cost.terminal},
                     {"control", r.cost.control}};
  summary["terminal_error_l2_region"] = m.terminal_error;
  summary["trajectory_error"] = {{"sup_time_l2_region", m.trajectory_error_sup},
                                 {"l2_region_time", m.trajectory_error_l2}};
  summary["control_norm_l2"] = m.control_norm;
  summary["variational_residual"] = r.variational_residual;
  summary["residual_tolerance"] = r.residual_tolerance;
  summary["ml_accuracy_warning"] = problem.table->accuracy_warning();
  summary["diagnostics"] = report_json(r);
  write_json(out_dir / "summary.json", summary);

  const ScenarioFunctions f(scenario);
  const double L = problem.basis.length();
  const int n = problem.grid.n_steps;
  const auto x_all = uniform_points(0.0, L);
  const auto x_reg = uniform_points(scenario.region.left, scenario.region.right);

  write_state(out_dir / "state.csv", problem, r.state);
  write_grid(out_dir / "control.csv", problem.grid, x_all, [&](int i) {
    return synthesize(r.control.row(std::min(i, n - 1)), problem.basis, x_all);
  });
  if (options.full_domain_desired) {
    // Extended target on [0, L]; only the region part enters the cost.
    const double left_value = 0.25 * f.desired(scenario.region.left, 0.0);
    const double right_value = f.desired(scenario.region.left, 0.0);
    write_grid(out_dir / "desired.csv", problem.grid, x_all, [&](int i) {
      std::vector<double> v(x_all.size());
      for (std::size_t q = 0; q < x_all.size(); ++q) {
        const double xq = x_all[q];
        v[q] = xq < scenario.region.left    ? left_value
               : xq > scenario.region.right ? right_value
                                            : f.desired(xq, problem.grid.node(i));
      }
      return v;
    });
  } else {
    write_grid(out_dir / "desired.csv", problem.grid, x_reg, [&](int i) {
      std::vector<double> v(x_reg.size());
      for (std::size_t q = 0; q < x_reg.size(); ++q) v[q] = f.desired(x_reg[q], problem.grid.node(i));
      return v;
    });
  }
  write_grid(out_dir / "error.csv", problem.grid, x_reg, [&](int i) {
    std::vector<double> v = synthesize(r.state.row(i), problem.basis, x_reg);
    for (std::size_t q = 0; q < x_reg.size(); ++q) v[q] -= f.desired(x_reg[q], problem.grid.node(i));
    return v;
  });
  {
    std::ofstream out = open_out(out_dir / "final_slice.csv");
    out << "x,state,target\n";
    const std::vector<double> y = synthesize(r.state.row(n), problem.basis, x_reg);
    for (std::size_t q = 0; q < x_reg.size(); ++q)
      out << fmt(x_reg[q]) << ',' << fmt(y[q]) << ',' << fmt(f.terminal(x_reg[q])) << '\n';
  }
  write_control_modes(out_dir / "control_modes.csv", r.control);

  log << r.diagnostics << '\n'
      << "cost " << r.cost.total << " (tracking " << r.cost.tracking << ", terminal "
      << r.cost.terminal << ", control " << r.cost.control << ")\n"
      << "terminal error " << m.terminal_error << ", trajectory error sup "
      << m.trajectory_error_sup << " / L2 " << m.trajectory_error_l2 << ", control norm "
      << m.control_norm << '\n';
  return r.converged ? 0 : 3;
}

void write_control_modes(const fs::path& path, const ModalTrajectory& control) {
  if (control.sampling != Sampling::steps) throw DomainError("controls are step-sampled");
  std::ofstream out = open_out(path);
  out << "step,mode,value\n";
  for (int j = 0; j < control.n_rows(); ++j)
    for (int k = 0; k < control.n_modes(); ++k)
      out << j << ',' << k << ',' << fmt(control.coefficients(j, k), 17) << '\n';
}

ModalTrajectory read_control_modes(const fs::path& path, const TimeGrid& grid, int n_modes) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open control file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("step,mode,value", 0) != 0)
    throw ValidationError("control file must start with the header 'step,mode,value'");
  ModalTrajectory u = ModalTrajectory::zeros(grid, n_modes, Sampling::steps);
  std::vector<char> seen(static_cast<std::size_t>(grid.n_steps) * static_cast<std::size_t>(n_modes), 0);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    int j = -1, k = -1;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> j >> c1 >> k >> c2 >> v) || c1 != ',' || c2 != ',')
      throw ValidationError("control file row " + std::to_string(row) + " is malformed");
    if (j < 0 || j >= grid.n_steps || k < 0 || k >= n_modes) {
      std::ostringstream os;
      os << "control file row " << row << " refers to step " << j << ", mode " << k
         << " outside the " << grid.n_steps << " x " << n_modes << " grid";
      throw ValidationError(os.str());
    }
    u.coefficients(j, k) = v;
    seen[static_cast<std::size_t>(j) * static_cast<std::size_t>(n_modes) + static_cast<std::size_t>(k)] = 1;
  }
  for (char s : seen)
    if (!s) throw ValidationError("control file does not cover every (step, mode) pair");
  return u;
}

int run_forward(const TrackingScenario& scenario, const fs::path& control_file,
                const fs::path& out_dir, std::ostream& log) {
  const TrackingProblem problem = build_problem(scenario);
  const ModalTrajectory u = read_control_modes(control_file, problem.grid, problem.n_modes());
  fs::create_directories(out_dir);
  const ModalTrajectory y = problem.forward(u);
  write_state(out_dir / "state.csv", problem, y);
  log << "terminal error " << terminal_error(y, problem.data) << '\n';
  return 0;
}

}  // namespace fractrack
