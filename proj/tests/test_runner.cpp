#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "fractrack/errors.hpp"
#include "fractrack/runner.hpp"
#include "fractrack/scenario.hpp"

using namespace fractrack;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("fractrack_test_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int fields(const std::string& line) { return 1 + static_cast<int>(std::count(line.begin(), line.end(), ',')); }

int run_cli(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string("\"") + FRACTRACK_CLI + "\" " + args + " > \"" + stdout_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TrackingScenario small() {
  TrackingScenario s = paper_example();
  s.n_modes = 8;
  s.n_steps = 24;
  return s;
}

}  // namespace

TEST_SUITE("runner") {
  TEST_CASE("optimize writes every output") {
    const fs::path dir = fresh_dir("opt");
    std::ostringstream log;
    REQUIRE(run_optimize(small(), dir, {}, log) == 0);
    for (const char* f : {"summary.json", "state.csv", "control.csv", "desired.csv", "error.csv", "final_slice.csv",
                          "control_modes.csv"})
      CHECK(fs::exists(dir / f));

    const int grid_rows = 25 * kExportPoints;
    for (const char* f : {"state.csv", "control.csv", "desired.csv", "error.csv"}) {
      const auto l = lines(dir / f);
      CAPTURE(f);
      REQUIRE(l.size() == static_cast<std::size_t>(grid_rows + 1));
      CHECK(l[0] == "t,x,value");
      for (std::size_t i = 1; i < l.size(); ++i) CHECK(fields(l[i]) == 3);
    }
    const auto fsl = lines(dir / "final_slice.csv");
    CHECK(fsl.size() == static_cast<std::size_t>(kExportPoints + 1));
    CHECK(fsl[0] == "x,state,target");
    CHECK(lines(dir / "control_modes.csv").size() == 24 * 8 + 1);

    const json s = json::parse(slurp(dir / "summary.json"));
    CHECK(s["status"] == "converged");
    CHECK(s["method"] == "direct");
    CHECK(s["n_modes"] == 8);
    CHECK(s["n_steps"] == 24);
    for (const char* k : {"cost", "terminal_error_l2_region", "trajectory_error", "control_norm_l2",
                          "variational_residual", "residual_tolerance", "ml_accuracy_warning", "diagnostics"})
      CHECK(s.contains(k));
    CHECK(s["variational_residual"].get<double>() <= s["residual_tolerance"].get<double>());

    const auto p = build_problem(small());
    const auto r = solve_direct(p);
    const auto m = tracking_metrics(p, r.state, r.control);
    CHECK(s["control_norm_l2"].get<double>() == doctest::Approx(r.control.l2_norm()).epsilon(1e-12));
    CHECK(s["terminal_error_l2_region"].get<double>() == doctest::Approx(m.terminal_error).epsilon(1e-12));
    CHECK(s["cost"]["total"].get<double>() == doctest::Approx(r.cost.total).epsilon(1e-12));
    CHECK(m.trajectory_error_sup >= m.terminal_error);

    // desired.csv lives on the region by default
    const auto d = lines(dir / "desired.csv");
    CHECK(d[1].rfind("0,0.3,", 0) == 0);
    fs::remove_all(dir);
  }

  TEST_CASE("extended target on the whole domain") {
    const fs::path dir = fresh_dir("ext");
    std::ostringstream log;
    RunOptions o;
    o.full_domain_desired = true;
    REQUIRE(run_optimize(small(), dir, o, log) == 0);
    const auto d = lines(dir / "desired.csv");
    REQUIRE(d.size() == static_cast<std::size_t>(25 * kExportPoints + 1));
    CHECK(d[1].rfind("0,0,", 0) == 0);
    const ScenarioFunctions f(small());
    const double left = std::stod(d[1].substr(d[1].rfind(',') + 1));
    const double right = std::stod(d[kExportPoints].substr(d[kExportPoints].rfind(',') + 1));
    CHECK(left == doctest::Approx(0.25 * f.desired(0.3, 0.0)).epsilon(1e-10));
    CHECK(right == doctest::Approx(f.desired(0.3, 0.0)).epsilon(1e-10));
    fs::remove_all(dir);
  }

  TEST_CASE("runs are deterministic and replay through forward") {
    const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
    std::ostringstream log;
    REQUIRE(run_optimize(small(), a, {}, log) == 0);
    REQUIRE(run_optimize(small(), b, {}, log) == 0);
    for (const char* f : {"summary.json", "state.csv", "control.csv", "control_modes.csv"})
      CHECK(slurp(a / f) == slurp(b / f));
    REQUIRE(run_forward(small(), a / "control_modes.csv", c, log) == 0);
    CHECK(slurp(c / "state.csv") == slurp(a / "state.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
  }

  TEST_CASE("zero tracking weights produce a zero control") {
    const fs::path dir = fresh_dir("zero");
    TrackingScenario s = small();
    s.weights = {0.0, 0.0, 1.0};
    std::ostringstream log;
    REQUIRE(run_optimize(s, dir, {}, log) == 0);
    const auto l = lines(dir / "control.csv");
    for (std::size_t i = 1; i < l.size(); ++i) CHECK(std::stod(l[i].substr(l[i].rfind(',') + 1)) == 0.0);
    fs::remove_all(dir);
  }

  TEST_CASE("failed and unconverged runs are reported") {
    const fs::path dir = fresh_dir("fail");
    std::ostringstream log;
    TrackingScenario big = paper_example();
    big.n_modes = 101;
    big.n_steps = 200;
    CHECK(run_optimize(big, dir, {}, log) == 2);
    json s = json::parse(slurp(dir / "summary.json"));
    CHECK(s["status"] == "error");
    CHECK(s["error"].get<std::string>().find("unknowns") != std::string::npos);

    TrackingScenario fp = small();
    fp.fixed_point.max_iter = 5;
    RunOptions o;
    o.method = Method::fixed_point;
    CHECK(run_optimize(fp, dir, o, log) == 3);
    s = json::parse(slurp(dir / "summary.json"));
    CHECK(s["status"] == "not_converged");
    CHECK(s["method"] == "fixed_point");
    fs::remove_all(dir);
  }

  TEST_CASE("control file validation") {
    const fs::path dir = fresh_dir("ctl");
    fs::create_directories(dir);
    const TimeGrid g = TimeGrid::make(1.0, 2);
    auto write = [&](const std::string& text) {
      std::ofstream(dir / "c.csv") << text;
      return dir / "c.csv";
    };
    const auto u = read_control_modes(write("step,mode,value\n0,0,1.5\n1,0,-2\n"), g, 1);
    CHECK(u.coefficients(0, 0) == 1.5);
    CHECK(u.coefficients(1, 0) == -2.0);
    CHECK_THROWS_AS(read_control_modes(write("a,b,c\n0,0,1\n1,0,1\n"), g, 1), ValidationError);
    CHECK_THROWS_AS(read_control_modes(write("step,mode,value\n0,0,1\n"), g, 1), ValidationError);
    CHECK_THROWS_AS(read_control_modes(write("step,mode,value\n0,0,1\n2,0,1\n"), g, 1), ValidationError);
    CHECK_THROWS_AS(read_control_modes(write("step,mode,value\n0;0;1\n"), g, 1), ValidationError);
    CHECK_THROWS_AS(read_control_modes(dir / "missing.csv", g, 1), ValidationError);
    fs::remove_all(dir);
  }

  TEST_CASE("command line") {
    const fs::path dir = fresh_dir("cli");
    fs::create_directories(dir);
    CHECK(run_cli("show-example", dir / "example.json") == 0);
    CHECK(parse_scenario(slurp(dir / "example.json")) == paper_example());

    CHECK(run_cli("optimize --modes 6 --steps 12 --out \"" + (dir / "run").string() + "\"") == 0);
    const json s = json::parse(slurp(dir / "run" / "summary.json"));
    CHECK(s["n_modes"] == 6);
    CHECK(s["n_steps"] == 12);
    CHECK(run_cli("forward --modes 6 --steps 12 --control \"" + (dir / "run" / "control_modes.csv").string() +
                  "\" --out \"" + (dir / "replay").string() + "\"") == 0);
    CHECK(slurp(dir / "replay" / "state.csv") == slurp(dir / "run" / "state.csv"));
    CHECK(run_cli("forward --modes 7 --steps 12 --control \"" + (dir / "run" / "control_modes.csv").string() +
                  "\" --out \"" + (dir / "replay").string() + "\"") == 4);

    CHECK(run_cli("optimize --scenario \"" + std::string(FRACTRACK_SCENARIO_DIR) +
                  "/paper_example.json\" --modes 4 --steps 10 --method fixed-point --out \"" + (dir / "fp").string() +
                  "\"") == 3);
    CHECK(json::parse(slurp(dir / "fp" / "summary.json"))["method"] == "fixed_point");

    std::ofstream(dir / "bad.json") << "{\"schema\": \"fractrack.scenario/1\",\n \"alpha\": }";
    CHECK(run_cli("optimize --scenario \"" + (dir / "bad.json").string() + "\"") == 4);
    CHECK(run_cli("optimize --scenario \"" + (dir / "absent.json").string() + "\"") == 4);
    CHECK(run_cli("optimize --method newton") != 0);
    CHECK(run_cli("") != 0);

    CHECK(run_cli("verify ml", dir / "verify.json") == 0);
    const json v = json::parse(slurp(dir / "verify.json"));
    REQUIRE(v.is_array());
    CHECK(v[0]["suite"] == "ml");
    CHECK(v[0]["passed"] == true);
    fs::remove_all(dir);
  }
}
