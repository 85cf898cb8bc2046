#include <cmath>
#include <random>

#include "doctest.h"
#include "ndac/model.hpp"
#include "ndac/quadrature.hpp"

using namespace ndac;

namespace {

const ValidationCheck* find_check(const ValidationReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("polynomial arithmetic") {
  const Polynomial p{1.0, -2.0, 3.0};
  CHECK(p(2.0) == doctest::Approx(9.0));
  CHECK(p.derivative()(2.0) == doctest::Approx(10.0));
  CHECK(p.antiderivative()(1.0) == doctest::Approx(1.0 - 1.0 + 1.0));
  const Polynomial q = p * Polynomial{0.0, 1.0};
  CHECK(q(2.0) == doctest::Approx(18.0));
  std::vector<double> x{-1.0, 0.0, 0.5, 2.0}, y(4);
  p.evaluate(x.data(), y.data(), x.size());
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(y[k] == doctest::Approx(p(x[k])));
}

TEST_CASE("quadrature against closed forms") {
  const auto r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(r.value - (std::exp(1.0) - 1.0)) < 1e-12);
  const auto s = integrate([](double x) { return std::sqrt(1.0 - x * x); }, -1.0, 1.0, 1e-9);
  CHECK(std::abs(s.value - M_PI / 2.0) < 1e-9);
  const auto back = integrate([](double x) { return x * x; }, 1.0, 0.0, 1e-12);
  CHECK(back.value == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("validate_model accepts the linear case") {
  const auto m = make_model("linear-cubic");
  const auto rep = validate_model(m);
  CHECK(rep.accepted());
  CHECK(m.mu() == doctest::Approx(1.0));
  CHECK(m.eta0() == doctest::Approx(1.0));
  CHECK(m.c_phi() == doctest::Approx(1.0));
}

TEST_CASE("cubic flux has zero equal-area residual") {
  const auto rep = validate_model(make_model("cubic-flux"));
  CHECK(rep.accepted());
  const auto* c = find_check(rep, "equal_area");
  REQUIRE(c != nullptr);
  CHECK(std::abs(c->residual) < 1e-12);
}

TEST_CASE("degenerate diffusion is rejected") {
  ModelParams p{{"phi", {0.0, 0.0, 1.0}}, {"f", {0.0, 1.0, 0.0, -1.0}}, {"alphas", {-1.0, 0.0, 1.0}}};
  const auto m = make_model("polynomial", p);
  const auto rep = validate_model(m);
  CHECK_FALSE(rep.accepted());
  const auto* c = find_check(rep, "phi_prime_positive");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->passed);
  CHECK_THROWS_AS(require_valid(m), ModelError);
}

TEST_CASE("validation failures are named") {
  SUBCASE("wrong zero") {
    ModelParams p{{"phi", {0.0, 1.0}}, {"f", {0.0, 1.0, 0.0, -1.0}}, {"alphas", {-1.0, 0.1, 1.0}}};
    CHECK_FALSE(find_check(validate_model(make_model("polynomial", p)), "zeros")->passed);
  }
  SUBCASE("unbalanced wells") {
    ModelParams p{{"phi", {0.0, 1.0}}, {"f", {-0.05, 1.0, 0.05, -1.0}}, {"alphas", {-1.0, 0.05, 1.0}}};
    CHECK_FALSE(find_check(validate_model(make_model("polynomial", p)), "equal_area")->passed);
  }
  SUBCASE("unknown model") { CHECK_THROWS_AS(make_model("no-such-model"), ModelError); }
}

TEST_CASE("potential matches symbolic antiderivatives") {
  const auto lin = make_model("linear-cubic");
  CHECK(potential(lin, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(potential(lin, 1.0) == 0.0);
  CHECK(potential(lin, -1.0) == 0.0);
  for (double u : {-1.7, -0.4, 0.3, 1.5})
    CHECK(std::abs(potential(lin, u) - (1 - u * u) * (1 - u * u) / 4.0) < 1e-10);

  const auto cf = make_model("cubic-flux");
  CHECK(std::abs(potential(cf, 0.0) - 1.0 / 3.0) < 1e-10);
  for (double u : {-0.8, 0.2, 0.9}) {
    const double oracle = 1.0 / 3.0 - u * u / 2.0 + std::pow(u, 6) / 6.0;
    CHECK(std::abs(potential(cf, u) - oracle) < 1e-10);
    CHECK(std::abs(cf.potential_exact(u) - oracle) < 1e-12);
  }
  CHECK_THROWS_AS(potential(lin, 2.5), std::domain_error);
}

TEST_CASE("property: W is a nondegenerate double well for every registry model") {
  for (const auto& m : registry_models()) {
    CAPTURE(m.name());
    CHECK(validate_model(m).accepted());
    const auto s = sample_potential(m, 1000);
    CHECK(s.w_values.front() == 0.0);
    CHECK(s.w_values.back() == 0.0);
    for (std::size_t k = 1; k + 1 < s.w_values.size(); ++k) CHECK(s.w_values[k] > 0.0);
  }
}

TEST_CASE("reaction flow fixed points") {
  const auto m = make_model("linear-cubic");
  for (double tau : {0.0, 0.5, 3.0}) {
    CHECK(reaction_flow_Y(m, tau, 0.0).y == doctest::Approx(0.0));
    const auto top = reaction_flow_Y(m, tau, 1.0);
    CHECK(top.y == doctest::Approx(1.0));
    CHECK(top.y_zeta == doctest::Approx(std::exp(-2.0 * tau)).epsilon(1e-10));
  }
}

TEST_CASE("reaction flow against the separable closed form") {
  const auto m = make_model("linear-cubic");
  // u^2 = z^2 e^{2t} / (1 - z^2 + z^2 e^{2t}); frozen at z = 0.5, t = 2.
  CHECK(std::abs(reaction_flow_Y(m, 2.0, 0.5).y - 0.97360926137106748) < 1e-10);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> zeta(-1.9, 1.9), tau(0.0, 5.0);
  for (int k = 0; k < 50; ++k) {
    const double z = zeta(rng), t = tau(rng);
    const double e = std::exp(2 * t);
    const double exact = std::copysign(std::sqrt(z * z * e / (1 - z * z + z * z * e)), z);
    CHECK(std::abs(reaction_flow_Y(m, t, z).y - exact) < 1e-10);
  }
}

TEST_CASE("property: Y_zeta identity matches finite differences") {
  std::mt19937_64 rng(11);
  for (const auto& m : registry_models()) {
    CAPTURE(m.name());
    std::uniform_real_distribution<double> zeta(-2.0, 2.0), tau(0.0, 5.0);
    for (int k = 0; k < 40; ++k) {
      const double z = zeta(rng), t = tau(rng);
      const double h = 1e-5;
      const double fd = (reaction_flow_Y(m, t, z + h).y - reaction_flow_Y(m, t, z - h).y) / (2 * h);
      const double yz = reaction_flow_Y(m, t, z).y_zeta;
      CAPTURE(z);
      CAPTURE(t);
      CHECK(std::abs(fd - yz) <= 1e-5 * std::abs(yz) + 1e-9);
    }
  }
}

TEST_CASE("property: reaction flow preserves order") {
  std::mt19937_64 rng(13);
  const auto m = make_model("cubic-flux");
  std::uniform_real_distribution<double> zeta(-2.0, 2.0), tau(0.0, 5.0);
  for (int k = 0; k < 60; ++k) {
    double a = zeta(rng), b = zeta(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double t = tau(rng);
    CHECK(reaction_flow_Y(m, t, a).y < reaction_flow_Y(m, t, b).y);
  }
}

TEST_CASE("property: Y_zeta growth bounds") {
  // exp(-mubar tau) <= Y_zeta <= C_Y exp(mu tau). For f = u - u^3 the closed form
  // Y_zeta e^{-tau} = (1 + zeta^2 (e^{2 tau} - 1))^{-3/2} gives C_Y = 1, frozen here.
  const double c_y = 1.0;
  std::mt19937_64 rng(17);
  for (const auto& m : registry_models()) {
    if (m.name() == "skewed-flux") continue;
    const double mubar = -m.min_f_prime(m.working_lo(), m.working_hi());
    std::uniform_real_distribution<double> zeta(-2.0, 2.0), tau(0.0, 5.0);
    for (int k = 0; k < 60; ++k) {
      const double z = zeta(rng), t = tau(rng);
      const double yz = reaction_flow_Y(m, t, z).y_zeta;
      CHECK(yz >= std::exp(-mubar * t) * (1 - 1e-10));
      CHECK(yz <= c_y * std::exp(m.mu() * t) * (1 + 1e-10));
    }
  }
}

TEST_CASE("reaction flow guards against leaving the working interval") {
  ModelParams p{{"phi", {0.0, 1.0}}, {"f", {0.0, -1.0, 0.0, 1.0}}, {"alphas", {-1.0, 0.0, 1.0}}};
  const auto bad = make_model("polynomial", p);
  CHECK_THROWS_AS(reaction_flow_Y(bad, 5.0, 1.5), ModelError);
}
