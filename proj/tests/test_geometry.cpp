#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "doctest.h"
#include "ndac/geometry.hpp"

using namespace ndac;

namespace {

SimState field(int n, Boundary bc, std::function<double(double, double)> u) {
  SimState s;
  s.grid = Grid2D::unit_square(n, bc);
  s.epsilon = 0.05;
  s.u.resize(s.grid.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s.u[s.grid.index(i, j)] = u(s.grid.x(i), s.grid.y(j));
  return s;
}

double radius(double x, double y) { return std::hypot(x - 0.5, y - 0.5); }

std::vector<Point> circle_points(double r, int n) {
  std::vector<Point> p;
  for (int k = 0; k < n; ++k) {
    const double t = 2 * M_PI * k / n;
    p.push_back({0.5 + r * std::cos(t), 0.5 + r * std::sin(t)});
  }
  return p;
}

}  // namespace

TEST_CASE("radial contour lies on the circle and runs counterclockwise") {
  const int n = 128;
  const auto s = field(n, Boundary::periodic, [](double x, double y) { return radius(x, y) - 0.3; });
  const auto c = extract_contour(s, 0.0);
  REQUIRE(c.loops.size() == 1);
  CHECK(c.chains.empty());
  const double h = 1.0 / n;
  for (const auto& p : c.loops[0].points) CHECK(std::abs(radius(p.x, p.y) - 0.3) < h * h);
  CHECK(signed_area(c.loops[0].points) == doctest::Approx(M_PI * 0.09).epsilon(1e-3));
  CHECK(perimeter(c.loops[0]) == doctest::Approx(2 * M_PI * 0.3).epsilon(1e-3));
}

TEST_CASE("circle around the periodic corner is unwrapped") {
  const auto s = field(96, Boundary::periodic, [](double x, double y) {
    double dx = std::min(x, 1 - x), dy = std::min(y, 1 - y);
    return std::hypot(dx, dy) - 0.2;
  });
  const auto c = extract_contour(s, 0.0);
  REQUIRE(c.loops.size() == 1);
  CHECK(signed_area(c.loops[0].points) == doctest::Approx(M_PI * 0.04).epsilon(2e-3));
  CHECK(perimeter(c.loops[0]) == doctest::Approx(2 * M_PI * 0.2).epsilon(2e-3));
  CHECK(distance_to_contour(c, s.grid, 0.99, 0.99) == doctest::Approx(0.2 - std::hypot(0.01, 0.01)).epsilon(1e-2));
}

TEST_CASE("constant field has an empty contour") {
  const auto s = field(32, Boundary::periodic, [](double, double) { return 1.0; });
  const auto c = extract_contour(s, 0.0);
  CHECK(c.empty());
  CHECK(c.vertex_count() == 0);
  CHECK(cross_section(s, c, StandingWave{}, 0.05) == 0.0);
}

TEST_CASE("x coordinate gives one Neumann chain on x = 1/2") {
  const auto s = field(32, Boundary::neumann, [](double x, double) { return x - 0.5; });
  const auto c = extract_contour(s, 0.0);
  CHECK(c.loops.empty());
  REQUIRE(c.chains.size() == 1);
  for (const auto& p : c.chains[0].points) CHECK(p.x == doctest::Approx(0.5));
  const auto sd = signed_distance(c, s.grid);
  CHECK(sd.signed_by_side);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) CHECK(sd.at(i, j) == doctest::Approx(s.grid.x(i) - 0.5));
}

TEST_CASE("signed distance to a circle is eikonal and clamped") {
  const int n = 64;
  const auto s = field(n, Boundary::periodic, [](double x, double y) { return radius(x, y) - 0.3; });
  const auto c = extract_contour(s, 0.0);
  const auto sd = signed_distance(c, s.grid);
  const auto clamped = signed_distance(c, s.grid, 0.05);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double exact = radius(s.grid.x(i), s.grid.y(j)) - 0.3;
      CHECK(std::abs(sd.at(i, j) - exact) < 1e-3);
      CHECK(std::abs(clamped.at(i, j)) <= 0.05);
      if (std::abs(exact) < 0.04) CHECK(clamped.at(i, j) == sd.at(i, j));
    }
}

TEST_CASE("concentric circles give two loops of opposite orientation") {
  const auto s = field(128, Boundary::periodic, [](double x, double y) {
    return std::abs(radius(x, y) - 0.3) - 0.1;
  });
  const auto c = extract_contour(s, 0.0);
  REQUIRE(c.loops.size() == 2);
  double net = 0.0;
  for (const auto& l : c.loops) net += signed_area(l.points);
  CHECK(net == doctest::Approx(M_PI * (0.16 - 0.04)).epsilon(2e-3));
  const auto sd = signed_distance(c, s.grid);
  CHECK(sd.at(64, 64) > 0.0);
  CHECK(sd.at(64 + 38, 64) < 0.0);
  CHECK_THROWS_AS(is_graph_over(c, contour_from_polyline(circle_points(0.3, 256))), std::invalid_argument);
}

TEST_CASE("graph check accepts a star and rejects a fold") {
  const auto reference = contour_from_polyline(circle_points(0.3, 512));
  std::vector<Point> star, fold;
  for (int k = 0; k < 2000; ++k) {
    const double t = 2 * M_PI * k / 2000;
    const double r = 0.3 + 0.03 * std::sin(5 * t);
    star.push_back({0.5 + r * std::cos(t), 0.5 + r * std::sin(t)});
    const double phi = t - 0.4 * std::sin(4 * t);
    const double rf = 0.3 + 0.05 * std::sin(4 * t);
    fold.push_back({0.5 + rf * std::cos(phi), 0.5 + rf * std::sin(phi)});
  }
  const auto g = is_graph_over(contour_from_polyline(star), reference);
  CHECK(g.is_graph);
  CHECK(g.max_normal_offset == doctest::Approx(0.03).epsilon(1e-2));
  CHECK_FALSE(is_graph_over(contour_from_polyline(fold), reference).is_graph);
}

TEST_CASE("profile data has a small cross-section error and the expected width") {
  const auto m = make_model("linear-cubic");
  const double eps = 0.04;
  const auto g = Grid2D::unit_square(160, Boundary::periodic);
  auto wave = std::make_shared<StandingWave>(compute_standing_wave(m, 20.0, 0.005));
  const auto s = init_state(g, eps, ProfileInit{wave, circle_distance(g, 0.5, 0.5, 0.3)}, m);
  const auto c = extract_contour(s, m.alpha());
  CHECK(cross_section(s, c, *wave, eps) < 0.01);
  const double w = interface_width(s, m, 0.05, c);
  const double expect = eps * std::sqrt(2.0) * std::atanh(0.95);
  CHECK(std::abs(w - expect) <= g.dx());
  CHECK(interface_width(s, m, 0.05) == w);
}

TEST_CASE("property: interface width shrinks as eta grows") {
  const auto m = make_model("cubic-flux");
  const auto g = Grid2D::unit_square(96, Boundary::periodic);
  const auto s = init_state(g, 0.05, CircleInit{0.4, 0.6, 0.25, -1.0, 1.0, 1.5}, m);
  double prev = std::numeric_limits<double>::infinity();
  for (double eta : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double w = interface_width(s, m, eta);
    CHECK(w <= prev);
    prev = w;
  }
}

TEST_CASE("contour CSV layout") {
  const auto c = contour_from_polyline(circle_points(0.2, 5));
  const auto path = (std::filesystem::temp_directory_path() / "ndac_contour_test.csv").string();
  write_contour_csv(path, c);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "loop_id,x,y");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 5);
  std::filesystem::remove(path);
}

TEST_CASE("tanh radial field has mean radius R") {
  const int n = 128;
  const auto s = field(n, Boundary::periodic, [](double x, double y) { return std::tanh((radius(x, y) - 0.25) / 0.03); });
  const auto c = extract_contour(s, 0.0);
  REQUIRE(c.loops.size() == 1);
  double mean = 0.0;
  for (const auto& p : c.loops[0].points) mean += radius(p.x, p.y);
  mean /= c.loops[0].points.size();
  CHECK(std::abs(mean - 0.25) <= 1.0 / n);
}

TEST_CASE("clamp is attained and vertices have zero distance") {
  const auto s = field(64, Boundary::periodic, [](double x, double y) { return radius(x, y) - 0.3; });
  const auto c = extract_contour(s, 0.0);
  const auto sd = signed_distance(c, s.grid, 0.04);
  double mx = 0.0;
  for (double v : sd.d) mx = std::max(mx, std::abs(v));
  CHECK(mx == 0.04);
  for (const auto& p : c.loops[0].points) CHECK(distance_to_contour(c, s.grid, p.x, p.y) < 1e-14);
}

TEST_CASE("flat field has zero interface width") {
  const auto m = make_model("linear-cubic");
  const auto s = field(32, Boundary::periodic, [](double, double) { return 1.0; });
  CHECK(interface_width(s, m, 0.05) == 0.0);
}

TEST_CASE("graph check trivial cases") {
  const auto a = contour_from_polyline(circle_points(0.3, 400));
  const auto b = contour_from_polyline(circle_points(0.25, 400));
  const auto gb = is_graph_over(b, a);
  CHECK(gb.is_graph);
  CHECK(gb.max_normal_offset == doctest::Approx(0.05).epsilon(1e-3));
  const auto ga = is_graph_over(a, a);
  CHECK(ga.is_graph);
  CHECK(ga.max_normal_offset <= 1.0 / 64);
}
