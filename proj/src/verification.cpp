#include "fractrack/verification.hpp"

#include <cmath>
#include <json.hpp>
#include <random>
#include <sstream>

#include "fractrack/errors.hpp"
#include "fractrack/fractional_calculus.hpp"
#include "fractrack/mittag_leffler.hpp"
#include "fractrack/runner.hpp"
#include "fractrack/scenario.hpp"

namespace fractrack {

namespace {

const std::vector<int> kRefinement = {40, 80, 160, 320};

VerifyCheck at_most(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value, threshold, "<=", value <= threshold, std::move(detail)};
}

VerifyCheck at_least(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value, threshold, ">=", value >= threshold, std::move(detail)};
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// --- ml ----------------------------------------------------------------------

void ml_suite(VerifyReport& r) {
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double z = -30.0 + 35.0 * i / 499.0;
    worst = std::max(worst, rel(ml({1.0, 1.0}, z), std::exp(z)));
  }
  r.checks.push_back(at_most("E_{1,1}(z) = exp(z), z in [-30, 5], max relative error", worst, 1e-10));

  worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double x = 10.0 * i / 499.0;
    worst = std::max(worst, std::abs(ml({2.0, 1.0}, -x * x) - std::cos(x)));
  }
  r.checks.push_back(at_most("E_{2,1}(-x^2) = cos(x), x in [0, 10], max abs error", worst, 1e-9));

  for (double a : {0.3, 0.5, 0.8, 1.0}) {
    int violations = 0;
    double prev = 1.0;
    for (int i = 0; i < 1000; ++i) {
      const double x = 100.0 * i / 999.0;
      const double v = ml({a, 1.0}, -x);
      if (!(v > 0.0 && v <= 1.0) || v > prev) ++violations;
      prev = v;
    }
    std::ostringstream name;
    name << "E_{" << a << ",1}(-x) in (0, 1] and non-increasing on 1000 points of [0, 100]";
    r.checks.push_back(at_most(name.str(), violations, 0.0, "violations"));
  }

  worst = 0.0;
  for (double a : {0.3, 0.5, 0.8}) {
    for (double b : {1.0, a, a + 1.0}) {
      for (double z0 : {-1.0, 5.0, -kAsymptoticCrossover}) {
        const double lo = ml({a, b}, z0 * (1.0 - 1e-12));
        const double hi = ml({a, b}, z0 * (1.0 + 1e-12));
        worst = std::max(worst, std::abs(lo - hi) / std::max(std::abs(lo), 1e-300));
      }
    }
  }
  r.checks.push_back(at_most("continuity across regime boundaries, max relative jump", worst, 1e-8));

  // d/dt [t E_{a,2}(lambda t^a)] = E_{a,1}(lambda t^a)
  worst = 0.0;
  const double s = 1e-4;
  for (double a : {0.3, 0.5, 0.8}) {
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      const double lam = -2.0;
      auto f = [&](double tt) { return tt * ml({a, 2.0}, lam * std::pow(tt, a)); };
      const double fd = (f(t + s) - f(t - s)) / (2.0 * s);
      worst = std::max(worst, rel(fd, ml({a, 1.0}, lam * std::pow(t, a))));
    }
  }
  r.checks.push_back(at_most("d/dt t E_{a,2}(lambda t^a) = E_{a,1}(lambda t^a), central differences",
                             worst, 1e-6));

  r.checks.push_back(at_most("ml_conv_moment(1, -1, 1) = 1 - 1/e",
                             rel(ml_conv_moment(1.0, -1.0, 1.0), 1.0 - std::exp(-1.0)), 1e-13));
}

// --- calculus ----------------------------------------------------------------

double ibp_residual(int n, double alpha) {
  const TimeGrid g = TimeGrid::make(1.0, n);
  const TimeSeries phi1 = TimeSeries::sample(g, [](double t) { return std::sin(t) + t * t; });
  const TimeSeries phi2 = TimeSeries::sample(g, [](double t) { return std::exp(-t); });
  return integration_by_parts_residual(phi1, phi2, alpha);
}

void calculus_suite(VerifyReport& r) {
  const TimeGrid g = TimeGrid::make(1.0, 100);
  const TimeSeries one = TimeSeries::sample(g, [](double) { return 1.0; });
  const TimeSeries lin = TimeSeries::sample(g, [](double t) { return t; });
  r.checks.push_back(at_most("I^0.5 1 at t = 1 equals 1/Gamma(1.5)",
                             rel(rl_integral_left(one, 0.5)[100], 1.0 / gamma_fn(1.5)), 1e-12));
  r.checks.push_back(at_most("Caputo D^0.5 t at t = 1 equals 1/Gamma(1.5)",
                             rel(caputo_left(lin, 0.5)[100], 1.0 / gamma_fn(1.5)), 1e-12));

  const TimeSeries a = TimeSeries::sample(g, [](double t) { return std::sin(3 * t); });
  const TimeSeries b = TimeSeries::sample(g, [](double t) { return std::exp(-t) + t * t; });
  std::vector<double> mix(a.values.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * a.values[i] - 3.0 * b.values[i];
  const TimeSeries m(g, mix);
  double lin_err = 0.0;
  const TimeSeries ca = caputo_left(a, 0.5), cb = caputo_left(b, 0.5), cm = caputo_left(m, 0.5);
  for (int i = 0; i <= 100; ++i) lin_err = std::max(lin_err, std::abs(cm[i] - 2.0 * ca[i] + 3.0 * cb[i]));
  r.checks.push_back(at_most("Caputo operator linearity, max abs deviation", lin_err, 1e-11));

  // I^a (D^a phi) = phi - phi(0) on a smooth function
  std::vector<double> fi;
  for (int n : kRefinement) {
    const TimeGrid gn = TimeGrid::make(1.0, n);
    const TimeSeries phi = TimeSeries::sample(gn, [](double t) { return 2.0 + std::sin(2.0 * t); });
    const TimeSeries back = rl_integral_left(caputo_left(phi, 0.5), 0.5);
    double e = 0.0;
    for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(back[i] - (phi[i] - phi[0])));
    fi.push_back(e);
  }
  r.checks.push_back(at_least("I^a D^a phi = phi - phi(0), a = 0.5, observed order of the max error",
                              min_observed_order(fi), 0.9, "errors " + join(fi)));

  std::vector<double> res;
  for (int n : kRefinement) res.push_back(ibp_residual(n, 0.5));
  r.checks.push_back(at_least("integration by parts residual, observed order (a = 0.5)",
                              min_observed_order(res), 1.0, "residuals " + join(res)));
}

// --- duality -----------------------------------------------------------------

struct DualityStudy {
  std::vector<double> residuals;
  double scale = 0.0;
};

ModalTrajectory smooth_control(const TimeGrid& grid, int modes, double phase) {
  ModalTrajectory u = ModalTrajectory::zeros(grid, modes, Sampling::steps);
  const double h = grid.step();
  for (int j = 0; j < grid.n_steps; ++j) {
    const double t = (j + 0.5) * h;
    for (int k = 0; k < modes; ++k)
      u.coefficients(j, k) = std::sin(3.0 * t + phase + k) * 10.0 / (1.0 + k * k);
  }
  return u;
}

DualityStudy duality_study() {
  DualityStudy s;
  TrackingScenario sc = paper_example();
  for (int n : kRefinement) {
    sc.n_steps = n;
    const TrackingProblem p = build_problem(sc);
    const ModalTrajectory ur = smooth_control(p.grid, p.n_modes(), 0.0);
    const ModalTrajectory u = smooth_control(p.grid, p.n_modes(), 1.3);
    const ModalTrajectory yr = p.forward(ur), yu = p.forward(u);
    const AdjointState z = p.adjoint(yr);
    const DualityTerms t = duality_terms(*p.table, yr, yu, ur, u, z, p.data, p.weights);
    s.residuals.push_back(t.residual());
    s.scale = t.scale();
  }
  return s;
}

void duality_suite(VerifyReport& r) {
  std::vector<double> ibp;
  for (int n : kRefinement) ibp.push_back(ibp_residual(n, 0.5));
  r.checks.push_back(at_least("integration by parts residual, observed order", min_observed_order(ibp),
                              1.0, "residuals " + join(ibp)));

  const DualityStudy d = duality_study();
  r.checks.push_back(at_least("adjoint duality residual, observed order", min_observed_order(d.residuals),
                              1.0, "residuals " + join(d.residuals)));
  r.checks.push_back(at_most("adjoint duality residual at 320 steps / data scale",
                             d.residuals.back() / d.scale, 1e-3));
}

// --- gradient ----------------------------------------------------------------

void gradient_suite(VerifyReport& r) {
  const TrackingProblem p = build_problem(paper_example());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  ModalTrajectory d = p.zero_control();
  for (Eigen::Index i = 0; i < d.coefficients.size(); ++i) d.coefficients.data()[i] = normal(rng);
  const std::vector<double> steps = {1.0, 1e-1, 1e-2};

  const GradientCheckReport at_zero = gradient_check(p, p.zero_control(), d, steps);
  r.checks.push_back(at_most("central differences vs adjoint gradient at u = 0",
                             at_zero.max_relative_error, 1e-6,
                             "relative errors " + join(at_zero.relative_errors)));
  const OptimizationReport opt = solve_direct(p);
  const GradientCheckReport at_opt = gradient_check(p, opt.control, d, steps);
  r.checks.push_back(at_most("central differences vs adjoint gradient at the optimum",
                             at_opt.max_relative_error, 1e-6,
                             "relative errors " + join(at_opt.relative_errors)));
}

// --- convergence -------------------------------------------------------------

void convergence_suite(VerifyReport& r) {
  // Manufactured smooth solution y = t^2 in one mode.
  std::vector<double> res;
  const double alpha = 0.5;
  for (int n : kRefinement) {
    const SpectralBasis basis = SpectralBasis::build(1.0, -1.0, 1.0, 1);
    const TimeGrid g = TimeGrid::make(1.0, n);
    const double lam = basis.eigenvalue(0);
    ModalTrajectory y = ModalTrajectory::zeros(g, 1, Sampling::nodes);
    ModalTrajectory u = ModalTrajectory::zeros(g, 1, Sampling::steps);
    for (int i = 0; i <= n; ++i) y.coefficients(i, 0) = g.node(i) * g.node(i);
    for (int j = 0; j < n; ++j) {
      const double t = g.node(j + 1);
      u.coefficients(j, 0) = 2.0 * std::pow(t, 2.0 - alpha) / gamma_fn(3.0 - alpha) - lam * t * t;
    }
    res.push_back(pde_residual(basis, y, u, alpha));
  }
  r.checks.push_back(at_least("PDE residual of a smooth solution, observed order", min_observed_order(res),
                              2.0 - alpha - 0.1, "residuals " + join(res)));

  // Forward self-convergence at T with a smooth control.
  TrackingScenario sc = paper_example();
  std::vector<double> finals;
  Eigen::VectorXd prev;
  double change = 0.0;
  for (int n : {120, 240}) {
    sc.n_steps = n;
    const TrackingProblem p = build_problem(sc);
    ModalTrajectory u = p.zero_control();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < p.n_modes(); ++k)
        u.coefficients(j, k) = std::cos(5.0 * (j + 0.5) * p.grid.step() + k) / (1.0 + k);
    const ModalTrajectory y = p.forward(u);
    const Eigen::VectorXd yT = y.coefficients.row(n).transpose();
    if (prev.size()) change = region_l2_norm(SpectralField(yT - prev), p.data.gram);
    prev = yT;
  }
  r.checks.push_back(at_most("forward state at T, region L2 change from 120 to 240 steps", change, 1e-4));

  // Optimizer self-convergence.
  sc = paper_example();
  auto metrics = [](const TrackingScenario& s) {
    const TrackingProblem p = build_problem(s);
    const OptimizationReport o = solve_direct(p);
    return tracking_metrics(p, o.state, o.control);
  };
  const TrackingMetrics base = metrics(sc);
  TrackingScenario fine_t = sc;
  fine_t.n_steps *= 2;
  TrackingScenario fine_k = sc;
  fine_k.n_modes *= 2;
  for (const auto& [label, s] : {std::pair{"steps", fine_t}, std::pair{"modes", fine_k}}) {
    const TrackingMetrics m = metrics(s);
    r.checks.push_back(at_most(std::string("terminal error, relative change when doubling ") + label,
                               rel(m.terminal_error, base.terminal_error), 0.02));
    r.checks.push_back(at_most(std::string("control norm, relative change when doubling ") + label,
                               rel(m.control_norm, base.control_norm), 0.02));
  }
}

}  // namespace

double min_observed_order(const std::vector<double>& errors) {
  double order = INFINITY;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i] == 0.0 && errors[i - 1] == 0.0) continue;
    order = std::min(order, std::log2(errors[i - 1] / errors[i]));
  }
  return order;
}

bool VerifyReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string VerifyReport::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e = {{"name", c.name},
                        {"value", c.value},
                        {"threshold", c.threshold},
                        {"comparison", c.comparison},
                        {"passed", c.passed}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    j["checks"].push_back(e);
  }
  return j.dump(2);
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s = {"ml", "calculus", "duality", "gradient", "convergence"};
  return s;
}

VerifyReport run_verify(const std::string& suite) {
  VerifyReport r;
  r.suite = suite;
  if (suite == "ml")
    ml_suite(r);
  else if (suite == "calculus")
    calculus_suite(r);
  else if (suite == "duality")
    duality_suite(r);
  else if (suite == "gradient")
    gradient_suite(r);
  else if (suite == "convergence")
    convergence_suite(r);
  else
    throw ValidationError("unknown verification suite '" + suite + "'");
  return r;
}

}  // namespace fractrack
