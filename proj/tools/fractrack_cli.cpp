// fractrack: optimal regional tracking control for time-fractional diffusion.

#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "fractrack/errors.hpp"
#include "fractrack/kernels.hpp"
#include "fractrack/runner.hpp"
#include "fractrack/scenario.hpp"
#include "fractrack/verification.hpp"

using namespace fractrack;

namespace {

struct Common {
  std::string scenario;
  std::string out = "out";
  int modes = 0;
  int steps = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Scenario JSON file (default: built-in example)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--modes", c.modes, "Override the number of modes")->check(CLI::PositiveNumber);
  cmd->add_option("--steps", c.steps, "Override the number of time steps")->check(CLI::Range(2, 1 << 20));
}

TrackingScenario load(const Common& c) {
  TrackingScenario s = c.scenario.empty() ? paper_example() : load_scenario(c.scenario);
  if (c.modes > 0) s.n_modes = c.modes;
  if (c.steps > 0) s.n_steps = c.steps;
  s.validate();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal regional tracking control of time-fractional diffusion"};
  app.require_subcommand(1);

  Common opt_common;
  std::string method_name;
  bool full_domain = false;
  auto* optimize = app.add_subcommand("optimize", "Solve for the optimal control and export results");
  add_common(optimize, opt_common);
  optimize->add_option("--method", method_name, "Solver: direct or fixed-point")
      ->check(CLI::IsMember({"direct", "fixed-point"}));
  optimize->add_flag("--full-domain-desired", full_domain,
                     "Write desired.csv on the whole domain using the extended target");

  Common fwd_common;
  std::string control_file;
  auto* forward = app.add_subcommand("forward", "Simulate the state for a given modal control");
  add_common(forward, fwd_common);
  forward->add_option("--control", control_file, "control_modes.csv from a previous run")->required();

  std::vector<std::string> suites;
  auto* verify = app.add_subcommand("verify", "Run verification suites (JSON report on stdout)");
  verify->add_option("suites", suites, "ml, calculus, duality, gradient, convergence (default: all)")
      ->check(CLI::IsMember(verify_suites()));

  auto* show = app.add_subcommand("show-example", "Print the built-in example scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) {
      RunOptions o;
      if (!method_name.empty())
        o.method = method_name == "direct" ? Method::direct : Method::fixed_point;
      o.full_domain_desired = full_domain;
      std::clog << "kernels: " << kernels::isa_name(kernels::active().isa) << '\n';
      return run_optimize(load(opt_common), opt_common.out, o, std::clog);
    }
    if (*forward) return run_forward(load(fwd_common), control_file, fwd_common.out, std::clog);
    if (*verify) {
      if (suites.empty()) suites = verify_suites();
      bool ok = true;
      std::cout << "[\n";
      for (std::size_t i = 0; i < suites.size(); ++i) {
        const VerifyReport r = run_verify(suites[i]);
        ok = ok && r.passed();
        std::cout << r.to_json() << (i + 1 < suites.size() ? ",\n" : "\n");
        std::cout.flush();
      }
      std::cout << "]\n";
      return ok ? 0 : 1;
    }
    if (*show) {
      std::cout << serialize_scenario(paper_example());
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 4;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
