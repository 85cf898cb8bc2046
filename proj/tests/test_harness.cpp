#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ndac/harness.hpp"

using namespace ndac;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("generation time") {
  const auto m = make_model("linear-cubic");
  CHECK(generation_time(m, 0.01) == doctest::Approx(4.6052e-4).epsilon(1e-4));
  CHECK(generation_time(m, 0.04) == doctest::Approx(0.0016 * std::log(25.0)));
}

TEST_CASE("grid scaling and default eta") {
  ExperimentSpec s;
  CHECK(grid_for_epsilon(s, 0.01) == 256);
  s.cells_per_epsilon = 6.0;
  CHECK(grid_for_epsilon(s, 0.04) == 160);
  CHECK(grid_for_epsilon(s, 0.01) == 608);
  CHECK(grid_for_epsilon(s, 0.02) % 16 == 0);
  CHECK(default_eta(make_model("linear-cubic")) == doctest::Approx(0.1));
}

TEST_CASE("spec parsing") {
  const auto s = parse_spec(R"({"kind": "propagation", "model": "linear-cubic", "params": {"scale": 2},
    "grid": 128, "bc": "neumann", "epsilons": [0.05, 0.025], "initial": "circle",
    "center": [0.4, 0.6], "radius": 0.3, "seed": 9, "scheme": "imex"})");
  CHECK(s.kind == "propagation");
  CHECK(s.params.at("scale") == std::vector<double>{2.0});
  CHECK(s.grid == 128);
  CHECK(s.bc == Boundary::neumann);
  CHECK(s.epsilons == std::vector<double>{0.05, 0.025});
  CHECK(s.cx == 0.4);
  CHECK(s.cy == 0.6);
  CHECK(s.radius == 0.3);
  CHECK(s.seed == 9u);
  CHECK(s.scheme == Scheme::imex_linearized);
  CHECK_NOTHROW(validate_spec(s));
}

TEST_CASE("spec errors") {
  CHECK_THROWS_AS(parse_spec(R"({"unknown_key": 1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_spec("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_spec(R"({"center": [0.5]})"), std::invalid_argument);
  CHECK_THROWS_AS(validate_spec(parse_spec(R"({"epsilons": [0.01, 0.02]})")), std::invalid_argument);
  CHECK_THROWS_AS(validate_spec(parse_spec(R"({"model": "nope"})")), std::invalid_argument);
  CHECK_THROWS(load_spec("/nonexistent/spec.json"));
}

TEST_CASE("seeded initial data is reproducible") {
  ExperimentSpec s;
  s.noise = 0.1;
  s.seed = 4;
  const auto m = make_model("linear-cubic");
  const auto g = Grid2D::unit_square(32, Boundary::periodic);
  const auto a = initial_function(s, m, g), b = initial_function(s, m, g);
  s.seed = 5;
  const auto c = initial_function(s, m, g);
  CHECK(a(0.3, 0.7) == b(0.3, 0.7));
  CHECK(a(0.3, 0.7) != c(0.3, 0.7));
}

TEST_CASE("emit_report writes tables and returns the check status") {
  Report r;
  r.experiment = "demo";
  r.tables.push_back({"empty", {"a", "b"}, {}});
  r.tables.push_back({"data", {"x"}, {{"1"}, {"2"}}});
  r.checks.push_back({"ok", true, "fine"});
  const auto dir = scratch("ndac_report_test");
  CHECK(emit_report(r, dir.string()) == 0);
  CHECK(slurp(dir / "empty.csv") == "a,b\n");
  CHECK(slurp(dir / "data.csv") == "x\n1\n2\n");
  CHECK(slurp(dir / "summary.txt").find("PASS ok") != std::string::npos);
  r.checks.push_back({"bad", false, "broken"});
  CHECK_FALSE(r.all_passed());
  CHECK(emit_report(r, dir.string()) == 1);
  CHECK(slurp(dir / "summary.txt").find("FAIL bad") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("coefficient experiment on the linear case") {
  ExperimentSpec s;
  const auto r = run_coeffs(s);
  CHECK(r.all_passed());
  REQUIRE(r.tables.size() >= 1);
  REQUIRE(r.tables[0].rows.size() == 1);
  CHECK(std::abs(std::stod(r.tables[0].rows[0][1]) - 1.0) <= 1e-8);
  CHECK(run_coeffs(s, true).tables[0].rows.size() == registry_models().size());
}

TEST_CASE("fit_m0") {
  const auto m = make_model("linear-cubic");
  const double eps = 0.1, eta = 0.05;
  CHECK(fit_m0({0.5, -0.5, 0.0}, {1.0, -1.0, 0.0}, m, eps, eta) == doctest::Approx(1.0));
  CHECK(fit_m0({0.15, -0.5}, {0.5, -1.0}, m, eps, eta) == doctest::Approx(1.51));
  CHECK(fit_m0({0.5, -0.32}, {1.0, -0.5}, m, eps, eta) == doctest::Approx(3.21));
}

TEST_CASE("barrier residual vanishes on exact solutions") {
  const auto m = make_model("linear-cubic");
  const double eps = 0.05;
  SUBCASE("reaction flow of constant data") {
    auto w = [&](double, double, double t) { return reaction_flow_Y(m, t / (eps * eps), 0.3).y; };
    const double scale = std::abs(m.f(0.3)) / (eps * eps);
    CHECK(std::abs(barrier_residual(m, eps, w, 0.5, 0.5, 1e-3, 1e-3, 1e-7)) < 1e-5 * scale);
  }
  SUBCASE("flat standing wave") {
    auto w = [&](double x, double, double) { return std::tanh((x - 0.5) / (eps * std::sqrt(2.0))); };
    const double h = 0.005 * eps;
    CHECK(std::abs(barrier_residual(m, eps, w, 0.51, 0.3, 0.0, h, 1e-7)) < 1e-2 / (eps * eps));
  }
}

TEST_CASE("generation barrier at t = 0 is the initial data") {
  const auto m = make_model("cubic-flux");
  auto u0 = [](double x, double y) { return 0.3 * std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y); };
  for (int sign : {-1, 1}) {
    CHECK(generation_barrier(m, u0, 0.05, 4.0, sign, 0.2, 0.1, 0.0) == doctest::Approx(u0(0.2, 0.1)));
    CHECK(sign * (generation_barrier(m, u0, 0.05, 4.0, sign, 0.2, 0.1, 1e-4) -
                  generation_barrier(m, u0, 0.05, 0.0, sign, 0.2, 0.1, 1e-4)) > 0.0);
  }
}

TEST_CASE("unknown experiment kind") {
  ExperimentSpec s;
  s.kind = "bogus";
  CHECK_THROWS_AS(run_experiment(s), std::invalid_argument);
}

TEST_CASE("generation from a single phase reports M0 = 1") {
  ExperimentSpec s;
  s.kind = "generation";
  s.initial = "constant";
  s.constant = 1.0;
  s.grid = 32;
  s.epsilons = {0.05, 0.04};
  const auto rep = run_generation(s);
  for (const auto& r : rep.rows) {
    CHECK(r.m0 == 1.0);
    CHECK(r.fraction_in_range == 1.0);
    CHECK(r.violation_range <= 0.0);
  }
  CHECK(generation_report(rep).all_passed());
  s.constant = 0.0;
  CHECK_THROWS_AS(run_generation(s), std::invalid_argument);
}

TEST_CASE("identical configs give identical CSV files") {
  ExperimentSpec s;
  s.kind = "generation";
  s.grid = 48;
  s.epsilons = {0.08, 0.06};
  s.noise = 0.05;
  s.seed = 12;
  const auto a = scratch("ndac_det_a"), b = scratch("ndac_det_b");
  emit_report(run_experiment(s), a.string());
  emit_report(run_experiment(s), b.string());
  CHECK(slurp(a / "generation.csv") == slurp(b / "generation.csv"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("halving dt barely moves the interface error") {
  ExperimentSpec s;
  s.kind = "propagation";
  s.initial = "profile-circle";
  s.cells_per_epsilon = 6.0;
  s.epsilons = {0.04};
  s.samples = 4;
  const auto full = run_interface_study(s);
  s.safety = 0.2;
  const auto half = run_interface_study(s);
  const auto worst = [](const InterfaceRun& r) {
    double h = 0.0;
    for (const auto& x : r.samples) h = std::max(h, x.hausdorff);
    return h;
  };
  const double budget = 10.0 * 0.04;
  CHECK(std::abs(worst(full.runs[0]) - worst(half.runs[0])) <= 0.1 * budget);
}

TEST_CASE("barrier residual at t = 0 agrees with one explicit step") {
  const auto m = make_model("linear-cubic");
  const double eps = 0.1;
  auto u0 = [](double x, double y) { return 0.4 * std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y); };
  const auto g = Grid2D::unit_square(128, Boundary::periodic);
  auto s = init_state(g, eps, FunctionInit{u0}, m);
  const auto before = s.u;
  SolverConfig cfg;
  cfg.record_every = 1000000;
  const double dt = 1e-7;
  step(s, cfg, m, dt);
  auto w = [&](double x, double y, double t) { return generation_barrier(m, u0, eps, 0.0, 1, x, y, t); };
  for (int i : {9, 40, 77}) {
    const int j = 2 * i % 128;
    const double x = g.x(i), y = g.y(j);
    const std::size_t k = g.index(i, j);
    // L(Y(t/eps^2, u0)) at t = 0 is -lap phi(u0), which one step measures as f(u0)/eps^2 - du/dt.
    const double from_step = m.f(before[k]) / (eps * eps) - (s.u[k] - before[k]) / dt;
    const double res = barrier_residual(m, eps, w, x, y, 0.0, 1e-3, 1e-8);
    CHECK(res == doctest::Approx(from_step).epsilon(1e-3).scale(1.0));
  }
}
