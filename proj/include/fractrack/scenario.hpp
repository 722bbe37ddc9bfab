#pragma once

// Tracking scenarios: problem data as a JSON document, and its conversion to
// a discretized TrackingProblem.
//
// {
//   "schema": "fractrack.scenario/1",
//   "name": "...",
//   "operator": {"diffusivity": 1.5, "reaction": -1, "length": 1},
//   "alpha": 0.5,
//   "horizon": 0.6,
//   "region": [0.3, 0.7],
//   "discretization": {"n_modes": 32, "n_steps": 120},
//   "weights": {"r1": 2e4, "r2": 2e7, "r3": 1},
//   "initial_state": {"expression": "100*x*(x-0.7)^2"},
//   "desired": {"expression": "..."},
//   "terminal": {"final_slice": true},
//   "solver": {"method": "direct", "relaxation": 0, "max_iter": 200, "tol": 1e-8}
// }
//
// Spatial sources are either {"expression": "..."} or a sampled table
// {"x": [...], "values": [...]} (linear interpolation). The desired
// trajectory table is {"t": [...], "x": [...], "values": [[...], ...]} with
// one row per t (bilinear interpolation). "terminal" is either a spatial
// source or {"final_slice": true}, meaning y_d(., T).

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fractrack/expression.hpp"
#include "fractrack/hum_optimizer.hpp"

namespace fractrack {

inline constexpr const char* kScenarioSchema = "fractrack.scenario/1";

struct SpatialSource {
  std::string expression;
  std::vector<double> x;
  std::vector<double> values;

  bool is_table() const { return expression.empty(); }
  bool operator==(const SpatialSource&) const = default;
};

struct SpaceTimeSource {
  std::string expression;
  std::vector<double> t;
  std::vector<double> x;
  // values[i][j] at (t[i], x[j]).
  std::vector<std::vector<double>> values;

  bool is_table() const { return expression.empty(); }
  bool operator==(const SpaceTimeSource&) const = default;
};

struct TrackingScenario {
  std::string name;
  double diffusivity = 1.0;
  double reaction = 0.0;
  double length = 1.0;
  double alpha = 1.0;
  double horizon = 1.0;
  Region region;
  int n_modes = 32;
  int n_steps = 120;
  CostWeights weights;
  SpatialSource initial_state;
  SpaceTimeSource desired;
  bool terminal_final_slice = true;
  SpatialSource terminal;
  Method method = Method::direct;
  FixedPointOptions fixed_point;

  // Throws ValidationError naming the violated invariant.
  void validate() const;

  bool operator==(const TrackingScenario&) const = default;
};

// Throws ParseError (JSON syntax or expression syntax, with line/column) or
// ValidationError.
TrackingScenario parse_scenario(const std::string& text);
TrackingScenario load_scenario(const std::filesystem::path& path);

std::string serialize_scenario(const TrackingScenario& s);

// The built-in regional tracking example.
TrackingScenario paper_example();

// Callable views of the scenario sources.
class ScenarioFunctions {
 public:
  explicit ScenarioFunctions(const TrackingScenario& s);

  double initial(double x) const;
  double desired(double x, double t) const;
  double terminal(double x) const;

 private:
  TrackingScenario s_;
  std::optional<Expression> initial_;
  std::optional<Expression> desired_;
  std::optional<Expression> terminal_;
};

TrackingData build_tracking_data(const TrackingScenario& s, const SpectralBasis& basis,
                                 const TimeGrid& grid);

TrackingProblem build_problem(const TrackingScenario& s);

}  // namespace fractrack
