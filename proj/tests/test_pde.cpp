#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>

#include "doctest.h"
#include "ndac/pde.hpp"

using namespace ndac;

namespace {

SimState random_state(const BistableModel& m, int n, double eps, Boundary bc, std::uint64_t seed,
                      double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> table(static_cast<std::size_t>(n) * n);
  for (auto& v : table) v = d(rng);
  const auto g = Grid2D::unit_square(n, bc);
  FunctionInit fi{[&, g](double x, double y) {
    const int i = std::min(n - 1, static_cast<int>((x - g.x0) / g.dx()));
    const int j = std::min(n - 1, static_cast<int>((y - g.y0) / g.dy()));
    return table[g.index(i, j)];
  }};
  return init_state(g, eps, fi, m);
}

SolverConfig quiet(Scheme s = Scheme::explicit_euler) {
  SolverConfig c;
  c.scheme = s;
  c.record_every = 1000000;
  return c;
}

}  // namespace

TEST_CASE("boundary names") {
  CHECK(parse_boundary("neumann") == Boundary::neumann);
  CHECK(parse_boundary("periodic") == Boundary::periodic);
  CHECK(to_string(Boundary::neumann) == "neumann");
  CHECK_THROWS_AS(parse_boundary("dirichlet"), std::invalid_argument);
  CHECK_THROWS_AS(Grid2D::unit_square(8, Boundary::periodic).validate(), std::invalid_argument);
}

TEST_CASE("periodic displacement uses the nearest image") {
  const auto g = Grid2D::unit_square(32, Boundary::periodic);
  double dx = 0, dy = 0;
  g.displacement(0.05, 0.5, 0.95, 0.5, dx, dy);
  CHECK(dx == doctest::Approx(-0.1));
  CHECK(dy == doctest::Approx(0.0));
  const auto n = Grid2D::unit_square(32, Boundary::neumann);
  n.displacement(0.05, 0.5, 0.95, 0.5, dx, dy);
  CHECK(dx == doctest::Approx(0.9));
}

TEST_CASE("constant equilibria are preserved exactly") {
  for (const auto& m : registry_models()) {
    for (double c : {m.alpha_minus(), m.alpha(), m.alpha_plus()}) {
      CAPTURE(m.name());
      CAPTURE(c);
      auto s = init_state(Grid2D::unit_square(32, Boundary::periodic), 0.05,
                          FunctionInit{[c](double, double) { return c; }}, m);
      const auto r = run(s, quiet(), m, 1e-3);
      for (double v : r.state.u) CHECK(v == c);
    }
  }
}

TEST_CASE("reaction-only mode follows the reaction flow") {
  const auto m = make_model("linear-cubic");
  const double eps = 0.1;
  auto s = init_state(Grid2D::unit_square(16, Boundary::periodic), eps,
                      FunctionInit{[](double x, double) { return 0.5 * std::sin(2 * M_PI * x); }}, m);
  auto cfg = quiet();
  cfg.reaction_only = true;
  cfg.dt_policy = AutoDt{0.01};
  const double t = eps * eps * std::abs(std::log(eps)) / m.mu();
  const auto r = run(s, cfg, m, t);
  for (int i = 0; i < 16; ++i) {
    const double z = 0.5 * std::sin(2 * M_PI * r.state.grid.x(i));
    CHECK(std::abs(r.state.at(i, 3) - reaction_flow_Y(m, t / (eps * eps), z).y) < 1e-8);
  }
}

TEST_CASE("small Fourier mode decays at the discrete explicit rate") {
  const auto m = make_model("linear-cubic");
  const int n = 32;
  const double eps = 0.2, amp = 1e-7;
  auto s = init_state(Grid2D::unit_square(n, Boundary::periodic), eps,
                      FunctionInit{[amp](double x, double) { return 1.0 + amp * std::cos(2 * M_PI * x); }},
                      m);
  const double h = 1.0 / n;
  const double lam = -4.0 / (h * h) * std::pow(std::sin(M_PI * h), 2) - 2.0 / (eps * eps);
  const double dt = 0.2 * h * h;
  auto cfg = quiet();
  cfg.dt_policy = FixedDt{dt};
  const int steps = 200;
  const auto r = run(s, cfg, m, steps * dt);
  const double expect = amp * std::pow(1.0 + dt * lam, steps);
  for (int i = 0; i < n; ++i) {
    const double got = r.state.at(i, 5) - 1.0;
    CHECK(std::abs(got - expect * std::cos(2 * M_PI * r.state.grid.x(i))) < 1e-3 * std::abs(expect));
  }
}

TEST_CASE("property: explicit energy never increases") {
  for (const auto& m : registry_models()) {
    for (auto bc : {Boundary::periodic, Boundary::neumann}) {
      CAPTURE(m.name());
      auto s = random_state(m, 32, 0.05, bc, 21, m.alpha_minus(), m.alpha_plus());
      auto cfg = quiet();
      cfg.energy_slack = 0.0;
      double prev = energy(s, m);
      for (int k = 0; k < 300; ++k) {
        step(s, cfg, m);
        const double e = energy(s, m);
        CHECK(e <= prev);
        prev = e;
      }
    }
  }
}

TEST_CASE("property: IMEX energy never increases") {
  const auto m = make_model("cubic-flux");
  auto s = random_state(m, 32, 0.05, Boundary::periodic, 23, -1.0, 1.0);
  auto cfg = quiet(Scheme::imex_linearized);
  cfg.dt_policy = FixedDt{1e-5};
  double prev = energy(s, m);
  for (int k = 0; k < 100; ++k) {
    step(s, cfg, m);
    const double e = energy(s, m);
    CHECK(e <= prev + 1e-12 * std::abs(prev));
    prev = e;
  }
}

TEST_CASE("property: data inside the wells stays inside") {
  std::mt19937_64 rng(29);
  for (const auto& m : registry_models()) {
    auto s = random_state(m, 32, 0.03, Boundary::neumann, rng(), m.alpha_minus(), m.alpha_plus());
    const auto r = run(s, quiet(), m, 2e-3);
    for (double v : r.state.u) {
      CHECK(v >= m.alpha_minus() - 1e-12);
      CHECK(v <= m.alpha_plus() + 1e-12);
    }
    CHECK(r.state.diagnostics.in_invariant_region);
  }
}

TEST_CASE("runs are deterministic") {
  const auto m = make_model("cubic-flux");
  auto s = random_state(m, 32, 0.05, Boundary::periodic, 31, -1.0, 1.0);
  const auto a = run(s, quiet(), m, 1e-3);
  const auto b = run(s, quiet(), m, 1e-3);
  CHECK(a.state.u == b.state.u);
  CHECK(a.state.step_count == b.state.step_count);
}

TEST_CASE("property: comparison principle") {
  std::mt19937_64 rng(37);
  for (const auto& m : registry_models()) {
    auto lo = random_state(m, 32, 0.05, Boundary::periodic, rng(), -1.2, 0.8);
    auto hi = lo;
    std::uniform_real_distribution<double> bump(0.0, 0.3);
    for (auto& v : hi.u) v += bump(rng);
    const auto r = comparison_run(lo, hi, quiet(), m, 2e-3);
    CHECK(r.ordered);
    CHECK(r.max_violation <= 1e-10);
  }
}

TEST_CASE("Neumann runs preserve mirror symmetry") {
  const auto m = make_model("linear-cubic");
  auto s = init_state(Grid2D::unit_square(32, Boundary::neumann), 0.05,
                      CircleInit{0.5, 0.5, 0.3, -1.0, 1.0, 1.0}, m);
  const auto r = run(s, quiet(), m, 2e-3);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 16; ++i) CHECK(r.state.at(i, j) == doctest::Approx(r.state.at(31 - i, j)).epsilon(1e-12));
}

TEST_CASE("circle initial data takes alpha on the circle") {
  const auto m = make_model("skewed-flux");
  const auto g = Grid2D::unit_square(64, Boundary::periodic);
  auto s = init_state(g, 0.05, CircleInit{0.5, 0.5, 0.25, -1.0, 1.0, 1.0}, m);
  CHECK(s.at(32, 32) < m.alpha());
  CHECK(s.at(0, 0) > m.alpha());
  CHECK_THROWS_AS(init_state(g, 0.05, FunctionInit{[](double, double) { return 7.0; }}, m),
                  std::invalid_argument);
}

TEST_CASE("fixed dt beyond the explicit limit is rejected") {
  const auto m = make_model("linear-cubic");
  auto s = random_state(m, 32, 0.05, Boundary::periodic, 41, -1.0, 1.0);
  auto cfg = quiet();
  cfg.dt_policy = FixedDt{10.0 * stable_dt(s, m, 1.0)};
  CHECK_THROWS_AS(resolve_dt(cfg, s, m), std::invalid_argument);
  cfg.scheme = Scheme::imex_linearized;
  CHECK_NOTHROW(resolve_dt(cfg, s, m));
}

TEST_CASE("snapshot round trip") {
  const auto m = make_model("linear-cubic");
  auto s = random_state(m, 16, 0.05, Boundary::periodic, 43, -1.0, 1.0);
  s.time = 0.125;
  const auto path = (std::filesystem::temp_directory_path() / "ndac_snapshot_test.bin").string();
  write_snapshot(path, s);
  const auto back = read_snapshot(path);
  std::filesystem::remove(path);
  CHECK(back.nx == 16);
  CHECK(back.ny == 16);
  CHECK(back.dx == s.grid.dx());
  CHECK(back.time == 0.125);
  CHECK(back.epsilon == 0.05);
  CHECK(back.u == s.u);
  CHECK_THROWS(read_snapshot(path));
}

TEST_CASE("run records start, cadence and end") {
  const auto m = make_model("linear-cubic");
  auto s = random_state(m, 16, 0.1, Boundary::periodic, 47, -1.0, 1.0);
  auto cfg = quiet();
  cfg.record_every = 10;
  int calls = 0;
  const auto r = run(s, cfg, m, 1e-3, {[&](const SimState&) { ++calls; }});
  CHECK(r.series.front().step == 0);
  CHECK(r.series.back().time == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(calls == static_cast<int>(r.series.size()));
  for (std::size_t k = 1; k < r.series.size(); ++k) CHECK(r.series[k].energy <= r.series[k - 1].energy);
  CHECK_THROWS_AS(run(r.state, cfg, m, 1e-4), std::invalid_argument);
}

TEST_CASE("single-cell dip below alpha_+ decays monotonically") {
  const auto m = make_model("linear-cubic");
  const double eps = 0.05;
  auto s = init_state(Grid2D::unit_square(32, Boundary::periodic), eps,
                      FunctionInit{[](double, double) { return 1.0; }}, m);
  const std::size_t c = s.grid.index(10, 12);
  s.u[c] -= 1e-3;
  update_diagnostics(s, m);
  auto cfg = quiet();
  const double dt = resolve_dt(cfg, s, m);
  double prev = 1e-3;
  for (int k = 0; k < 200; ++k) {
    step(s, cfg, m, dt);
    const double dev = 1.0 - s.u[c];
    CHECK(dev < prev);
    CHECK(dev <= 1e-3 * std::exp(m.f_prime(1.0) * s.time / (eps * eps)) * (1 + 1e-12));
    prev = dev;
  }
  for (double v : s.u) CHECK(v <= 1.0);
}

TEST_CASE("energy oracles") {
  const auto m = make_model("linear-cubic");
  const auto g = Grid2D::unit_square(64, Boundary::periodic);
  const auto flat = init_state(g, 0.05, FunctionInit{[](double, double) { return 1.0; }}, m);
  CHECK(energy(flat, m) == 0.0);
  const auto checker = init_state(g, 0.05, FunctionInit{[g](double x, double y) {
    const int i = static_cast<int>(x / g.dx()), j = static_cast<int>(y / g.dy());
    return (i + j) % 2 ? 1.0 : -1.0;
  }}, m);
  CHECK(energy(checker, m) > 0.0);
}

TEST_CASE("profile circle energy approaches the line energy") {
  for (const auto& m : {make_model("linear-cubic"), make_model("cubic-flux")}) {
    CAPTURE(m.name());
    const auto tc = compute_transport_coefficients(m);
    const auto gw = default_wave_grid(m);
    auto wave = std::make_shared<StandingWave>(compute_standing_wave(m, gw.half_width, gw.dz));
    const double eps = 0.02, r = 0.25;
    const auto g = Grid2D::unit_square(320, Boundary::periodic);
    const auto s = init_state(g, eps, ProfileInit{wave, circle_distance(g, 0.5, 0.5, r)}, m);
    const double line = 2 * M_PI * r * tc.surface_tension * tc.phi_star / eps;
    CHECK(energy(s, m) == doctest::Approx(line).epsilon(0.05));
  }
}

TEST_CASE("comparison examples") {
  const auto m = make_model("cubic-flux");
  auto hi = random_state(m, 32, 0.05, Boundary::periodic, 53, -1.0, 1.0);
  SUBCASE("identical states") {
    const auto r = comparison_run(hi, hi, quiet(), m, 1e-3);
    CHECK(r.max_violation == 0.0);
  }
  SUBCASE("uniform shift") {
    auto lo = hi;
    for (auto& v : lo.u) v -= 0.01;
    CHECK(comparison_run(lo, hi, quiet(), m, 1e-3).max_violation <= 1e-10);
  }
  SUBCASE("constant sub-solution") {
    auto lo = init_state(hi.grid, hi.epsilon, FunctionInit{[](double, double) { return -1.0; }}, m);
    const auto r = comparison_run(lo, hi, quiet(), m, 1e-3);
    CHECK(r.ordered);
    CHECK(r.max_violation == 0.0);
  }
}

TEST_CASE("stable dt follows the model stored at a reused address") {
  const auto ref = make_model("cubic-flux");
  const auto s = random_state(ref, 32, 0.05, Boundary::periodic, 59, -1.0, 1.0);
  const double expect = stable_dt(s, ref, 1.0);
  std::optional<BistableModel> slot;
  slot.emplace(make_model("linear-cubic"));
  const double lin = stable_dt(s, *slot, 1.0);
  slot.emplace(make_model("cubic-flux"));
  CHECK(stable_dt(s, *slot, 1.0) == expect);
  CHECK(lin > expect);
}
