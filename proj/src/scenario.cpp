#include "fractrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fractrack/errors.hpp"

namespace fractrack {

using nlohmann::json;

namespace {

constexpr double kCoverageSlack = 1e-12;

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

void check_axis(const std::vector<double>& axis, const char* name, double lo, double hi) {
  if (axis.size() < 2) invalid(std::string("table axis '") + name + "' needs at least two points");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i])) invalid(std::string("table axis '") + name + "' has a non-finite entry");
    if (i > 0 && !(axis[i] > axis[i - 1]))
      invalid(std::string("table axis '") + name + "' must be strictly increasing");
  }
  if (axis.front() > lo + kCoverageSlack || axis.back() < hi - kCoverageSlack) {
    std::ostringstream os;
    os << "table axis '" << name << "' must cover [" << lo << ", " << hi << "]";
    invalid(os.str());
  }
}

void check_expression(const std::string& text, const char* field, bool allow_t) {
  Expression e;
  try {
    e = Expression::parse(text);
  } catch (const ParseError& err) {
    throw ParseError(std::string(field) + ": " + err.message(), err.line(), err.column());
  }
  if (e.uses_t() && !allow_t) invalid(std::string(field) + " must not depend on t");
}

void check_spatial(const SpatialSource& s, const char* field, double lo, double hi) {
  if (!s.is_table()) {
    check_expression(s.expression, field, false);
    return;
  }
  check_axis(s.x, "x", lo, hi);
  if (s.values.size() != s.x.size())
    invalid(std::string(field) + ": table has " + std::to_string(s.values.size()) + " values for " +
            std::to_string(s.x.size()) + " points");
}

// Piecewise-linear interpolation on a strictly increasing axis (clamped).
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double v) {
  if (v <= axis.front()) return {0, 0.0};
  if (v >= axis.back()) return {axis.size() - 2, 1.0};
  const auto it = std::upper_bound(axis.begin(), axis.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - axis.begin()) - 1;
  return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
}

double interp(const std::vector<double>& axis, const std::vector<double>& values, double v) {
  const auto [i, f] = locate(axis, v);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

double get_number(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) invalid(std::string(where) + ": missing field '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) invalid(std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) invalid(std::string(where) + ": missing field '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_integer()) invalid(std::string(where) + "." + key + " must be an integer");
  return v.get<int>();
}

std::vector<double> get_vector(const json& j, const char* key, const char* where) {
  if (!j.contains(key) || !j.at(key).is_array())
    invalid(std::string(where) + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const json& v : j.at(key)) {
    if (!v.is_number()) invalid(std::string(where) + "." + key + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

SpatialSource read_spatial(const json& j, const char* where) {
  if (!j.is_object()) invalid(std::string(where) + " must be an object");
  SpatialSource s;
  if (j.contains("expression")) {
    if (!j.at("expression").is_string()) invalid(std::string(where) + ".expression must be a string");
    s.expression = j.at("expression").get<std::string>();
    if (s.expression.empty()) invalid(std::string(where) + ".expression is empty");
  } else {
    s.x = get_vector(j, "x", where);
    s.values = get_vector(j, "values", where);
  }
  return s;
}

SpaceTimeSource read_space_time(const json& j, const char* where) {
  if (!j.is_object()) invalid(std::string(where) + " must be an object");
  SpaceTimeSource s;
  if (j.contains("expression")) {
    if (!j.at("expression").is_string()) invalid(std::string(where) + ".expression must be a string");
    s.expression = j.at("expression").get<std::string>();
    if (s.expression.empty()) invalid(std::string(where) + ".expression is empty");
    return s;
  }
  s.t = get_vector(j, "t", where);
  s.x = get_vector(j, "x", where);
  if (!j.contains("values") || !j.at("values").is_array())
    invalid(std::string(where) + ".values must be an array of rows");
  for (const json& row : j.at("values")) {
    if (!row.is_array()) invalid(std::string(where) + ".values must be an array of rows");
    std::vector<double> r;
    for (const json& v : row) {
      if (!v.is_number()) invalid(std::string(where) + ".values must contain only numbers");
      r.push_back(v.get<double>());
    }
    s.values.push_back(std::move(r));
  }
  return s;
}

json write_spatial(const SpatialSource& s) {
  if (!s.is_table()) return json{{"expression", s.expression}};
  return json{{"x", s.x}, {"values", s.values}};
}

json write_space_time(const SpaceTimeSource& s) {
  if (!s.is_table()) return json{{"expression", s.expression}};
  return json{{"t", s.t}, {"x", s.x}, {"values", s.values}};
}

Method parse_method(const std::string& m) {
  if (m == "direct") return Method::direct;
  if (m == "fixed_point" || m == "fixed-point") return Method::fixed_point;
  invalid("solver.method must be 'direct' or 'fixed_point', got '" + m + "'");
}

}  // namespace

void TrackingScenario::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid(std::string(what) + " must be positive and finite");
  };
  positive(diffusivity, "operator.diffusivity");
  positive(length, "operator.length");
  positive(horizon, "horizon");
  if (!std::isfinite(reaction)) invalid("operator.reaction must be finite");
  if (!(alpha > 0.0 && alpha <= 1.0)) invalid("alpha must lie in (0, 1]");
  if (!(region.left >= 0.0 && region.left < region.right && region.right <= length)) {
    std::ostringstream os;
    os << "region [" << region.left << ", " << region.right
       << "] must be non-empty and inside [0, " << length << "]";
    invalid(os.str());
  }
  if (n_modes < 1) invalid("discretization.n_modes must be at least 1");
  if (n_steps < 2) invalid("discretization.n_steps must be at least 2");
  if (!(weights.r1 >= 0.0)) invalid("weights.r1 must be non-negative");
  if (!(weights.r2 >= 0.0)) invalid("weights.r2 must be non-negative");
  if (!(weights.r3 > 0.0)) invalid("weights.r3 must be strictly positive");
  if (!std::isfinite(weights.r1) || !std::isfinite(weights.r2) || !std::isfinite(weights.r3))
    invalid("weights must be finite");

  check_spatial(initial_state, "initial_state", 0.0, length);
  if (!desired.is_table()) {
    check_expression(desired.expression, "desired", true);
  } else {
    check_axis(desired.t, "t", 0.0, horizon);
    check_axis(desired.x, "x", region.left, region.right);
    if (desired.values.size() != desired.t.size()) invalid("desired: one row of values per t is required");
    for (const auto& row : desired.values)
      if (row.size() != desired.x.size()) invalid("desired: every row needs one value per x");
  }
  if (!terminal_final_slice) check_spatial(terminal, "terminal", region.left, region.right);

  if (fixed_point.relaxation > 1.0) invalid("solver.relaxation must not exceed 1");
  if (fixed_point.max_iter < 1) invalid("solver.max_iter must be at least 1");
  if (!(fixed_point.tol > 0.0)) invalid("solver.tol must be positive");
}

TrackingScenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string msg = e.what();
    throw ParseError("invalid JSON: " + msg, line, column);
  }
  if (!j.is_object()) invalid("scenario must be a JSON object");
  if (!j.contains("schema") || !j.at("schema").is_string())
    invalid("scenario is missing the 'schema' field");
  if (j.at("schema").get<std::string>() != kScenarioSchema)
    invalid("unsupported schema '" + j.at("schema").get<std::string>() + "', expected '" +
            kScenarioSchema + "'");

  TrackingScenario s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) invalid("name must be a string");
    s.name = j.at("name").get<std::string>();
  }
  if (!j.contains("operator")) invalid("missing field 'operator'");
  const json& op = j.at("operator");
  s.diffusivity = get_number(op, "diffusivity", "operator");
  s.reaction = get_number(op, "reaction", "operator");
  s.length = op.contains("length") ? get_number(op, "length", "operator") : 1.0;
  s.alpha = get_number(j, "alpha", "scenario");
  s.horizon = get_number(j, "horizon", "scenario");

  if (!j.contains("region") || !j.at("region").is_array() || j.at("region").size() != 2)
    invalid("region must be an array [left, right]");
  for (const json& v : j.at("region"))
    if (!v.is_number()) invalid("region must contain numbers");
  s.region = Region{j.at("region")[0].get<double>(), j.at("region")[1].get<double>()};

  if (!j.contains("discretization")) invalid("missing field 'discretization'");
  const json& d = j.at("discretization");
  s.n_modes = get_int(d, "n_modes", "discretization");
  s.n_steps = get_int(d, "n_steps", "discretization");

  if (!j.contains("weights")) invalid("missing field 'weights'");
  const json& w = j.at("weights");
  s.weights = CostWeights{get_number(w, "r1", "weights"), get_number(w, "r2", "weights"),
                          get_number(w, "r3", "weights")};

  if (!j.contains("initial_state")) invalid("missing field 'initial_state'");
  s.initial_state = read_spatial(j.at("initial_state"), "initial_state");
  if (!j.contains("desired")) invalid("missing field 'desired'");
  s.desired = read_space_time(j.at("desired"), "desired");
  if (!j.contains("terminal")) invalid("missing field 'terminal'");
  const json& term = j.at("terminal");
  if (term.is_object() && term.contains("final_slice")) {
    if (!term.at("final_slice").is_boolean() || !term.at("final_slice").get<bool>())
      invalid("terminal.final_slice must be true when present");
    s.terminal_final_slice = true;
  } else {
    s.terminal_final_slice = false;
    s.terminal = read_spatial(term, "terminal");
  }

  if (j.contains("solver")) {
    const json& sv = j.at("solver");
    if (!sv.is_object()) invalid("solver must be an object");
    if (sv.contains("method")) {
      if (!sv.at("method").is_string()) invalid("solver.method must be a string");
      s.method = parse_method(sv.at("method").get<std::string>());
    }
    if (sv.contains("relaxation")) s.fixed_point.relaxation = get_number(sv, "relaxation", "solver");
    if (sv.contains("max_iter")) s.fixed_point.max_iter = get_int(sv, "max_iter", "solver");
    if (sv.contains("tol")) s.fixed_point.tol = get_number(sv, "tol", "solver");
  }
  s.validate();
  return s;
}

TrackingScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

std::string serialize_scenario(const TrackingScenario& s) {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = s.name;
  j["operator"] = {{"diffusivity", s.diffusivity}, {"reaction", s.reaction}, {"length", s.length}};
  j["alpha"] = s.alpha;
  j["horizon"] = s.horizon;
  j["region"] = {s.region.left, s.region.right};
  j["discretization"] = {{"n_modes", s.n_modes}, {"n_steps", s.n_steps}};
  j["weights"] = {{"r1", s.weights.r1}, {"r2", s.weights.r2}, {"r3", s.weights.r3}};
  j["initial_state"] = write_spatial(s.initial_state);
  j["desired"] = write_space_time(s.desired);
  j["terminal"] = s.terminal_final_slice ? json{{"final_slice", true}} : write_spatial(s.terminal);
  j["solver"] = {{"method", std::string(to_string(s.method))},
                 {"relaxation", s.fixed_point.relaxation},
                 {"max_iter", s.fixed_point.max_iter},
                 {"tol", s.fixed_point.tol}};
  return j.dump(2) + "\n";
}

TrackingScenario paper_example() {
  TrackingScenario s;
  s.name = "regional tracking, alpha = 0.5";
  s.diffusivity = 1.5;
  s.reaction = -1.0;
  s.length = 1.0;
  s.alpha = 0.5;
  s.horizon = 0.6;
  s.region = Region{0.3, 0.7};
  s.n_modes = 32;
  s.n_steps = 120;
  s.weights = CostWeights{2e4, 2e7, 1.0};
  s.initial_state.expression = "100*x*(x-0.7)^2";
  s.desired.expression =
      "100*x*(x-0.7)^2*(0.6-t)/(0.6*exp(50*t)) + 4.5*t*(0.6-t)"
      " + (5*t/3)*(-0.5*x^4 + 2*x^3 - 2.8*x^2/exp(0.6-t) + 1.38*x/exp(3.9-6.5*t) - 0.05)";
  s.terminal_final_slice = true;
  s.method = Method::direct;
  return s;
}

ScenarioFunctions::ScenarioFunctions(const TrackingScenario& s) : s_(s) {
  if (!s.initial_state.is_table()) initial_ = Expression::parse(s.initial_state.expression);
  if (!s.desired.is_table()) desired_ = Expression::parse(s.desired.expression);
  if (!s.terminal_final_slice && !s.terminal.is_table())
    terminal_ = Expression::parse(s.terminal.expression);
}

double ScenarioFunctions::initial(double x) const {
  if (initial_) return (*initial_)(x, 0.0);
  return interp(s_.initial_state.x, s_.initial_state.values, x);
}

double ScenarioFunctions::desired(double x, double t) const {
  if (desired_) return (*desired_)(x, t);
  const SpaceTimeSource& d = s_.desired;
  const auto [i, f] = locate(d.t, t);
  const double a = interp(d.x, d.values[i], x);
  const double b = interp(d.x, d.values[i + 1], x);
  return (1.0 - f) * a + f * b;
}

double ScenarioFunctions::terminal(double x) const {
  if (s_.terminal_final_slice) return desired(x, s_.horizon);
  if (terminal_) return (*terminal_)(x, 0.0);
  return interp(s_.terminal.x, s_.terminal.values, x);
}

TrackingData build_tracking_data(const TrackingScenario& s, const SpectralBasis& basis,
                                 const TimeGrid& grid) {
  const ScenarioFunctions f(s);
  const QuadratureRule rule = QuadratureRule::composite_gauss_legendre(
      s.region.left, s.region.right, kGaussPointsPerPanel, kGaussPanels);
  const std::size_t nq = rule.nodes.size();
  const int modes = basis.n_modes();

  // xi_k at the region quadrature nodes, pre-multiplied by the weights.
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(nq), modes);
  for (std::size_t q = 0; q < nq; ++q)
    for (int k = 0; k < modes; ++k)
      phi(static_cast<Eigen::Index>(q), k) = rule.weights[q] * basis.eigenfunction(k, rule.nodes[q]);

  TrackingData data;
  data.region = s.region;
  data.gram = region_gram(s.region, basis);
  data.desired.resize(grid.n_nodes(), modes);
  data.desired_norm_sq.resize(static_cast<std::size_t>(grid.n_nodes()));
  Eigen::VectorXd values(static_cast<Eigen::Index>(nq));
  for (int i = 0; i < grid.n_nodes(); ++i) {
    const double t = grid.node(i);
    double sq = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const double v = f.desired(rule.nodes[q], t);
      values[static_cast<Eigen::Index>(q)] = v;
      sq += rule.weights[q] * v * v;
    }
    data.desired.row(i) = (phi.transpose() * values).transpose();
    data.desired_norm_sq[static_cast<std::size_t>(i)] = sq;
  }
  double sq = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    const double v = f.terminal(rule.nodes[q]);
    values[static_cast<Eigen::Index>(q)] = v;
    sq += rule.weights[q] * v * v;
  }
  data.terminal = phi.transpose() * values;
  data.terminal_norm_sq = sq;
  return data;
}

TrackingProblem build_problem(const TrackingScenario& s) {
  s.validate();
  SpectralBasis basis = SpectralBasis::build(s.diffusivity, s.reaction, s.length, s.n_modes);
  const TimeGrid grid = TimeGrid::make(s.horizon, s.n_steps);
  const ScenarioFunctions f(s);
  SpectralField y0 = project([&](double x) { return f.initial(x); }, basis);
  TrackingData data = build_tracking_data(s, basis, grid);
  return TrackingProblem::make(std::move(basis), grid, s.alpha, std::move(y0), std::move(data),
                               s.weights);
}

}  // namespace fractrack
