#pragma once

// Scenario-level drivers behind the command line: optimization and forward
// runs with CSV/JSON export.
//
// Output files (all CSV grids use a 101-point uniform spatial grid and every
// time node, header "t,x,value"):
//   state.csv          y(x, t) on [0, L]
//   control.csv        u(x, t) on [0, L]; node i shows the control of step min(i, n_steps - 1)
//   desired.csv        y_d(x, t) on the region (or the extended target on [0, L] on request)
//   error.csv          y(x, t) - y_d(x, t) on the region
//   final_slice.csv    "x,state,target" on the region at t = T
//   control_modes.csv  "step,mode,value" modal control coefficients, full precision;
//                      accepted back by run_forward
//   summary.json

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "fractrack/hum_optimizer.hpp"
#include "fractrack/scenario.hpp"

namespace fractrack {

inline constexpr int kExportPoints = 101;

struct TrackingMetrics {
  double terminal_error = 0.0;       // ||chi y(T) - y_dT||_{L2(omega)}
  double trajectory_error_sup = 0.0; // max_i ||chi y(t_i) - y_d(t_i)||_{L2(omega)}
  double trajectory_error_l2 = 0.0;  // ||chi y - y_d||_{L2(omega x (0,T))}, trapezoid in time
  double control_norm = 0.0;         // ||u||_{L2(Q)}
};

TrackingMetrics tracking_metrics(const TrackingProblem& problem, const ModalTrajectory& state,
                                 const ModalTrajectory& control);

OptimizationReport optimize(const TrackingProblem& problem, Method method,
                            const FixedPointOptions& options);

struct RunOptions {
  std::optional<Method> method;
  bool full_domain_desired = false;
};

// Returns the process exit status: 0 on success, 2 when the solver failed
// (summary.json then carries the diagnostic), 3 when the run finished but did
// not converge.
int run_optimize(const TrackingScenario& scenario, const std::filesystem::path& out_dir,
                 const RunOptions& options, std::ostream& log);

// Reads "step,mode,value" rows. Throws ValidationError on a shape mismatch.
ModalTrajectory read_control_modes(const std::filesystem::path& path, const TimeGrid& grid,
                                   int n_modes);
void write_control_modes(const std::filesystem::path& path, const ModalTrajectory& control);

// Forward simulation only; writes state.csv.
int run_forward(const TrackingScenario& scenario, const std::filesystem::path& control_file,
                const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace fractrack
