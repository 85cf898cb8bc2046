#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ndac/model.hpp"
#include "ndac/profiles.hpp"

namespace ndac {

enum class Boundary { neumann, periodic };

Boundary parse_boundary(const std::string& name);
std::string to_string(Boundary bc);

/// Cell-centred structured grid on [x0, x1] x [y0, y1].
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  Boundary bc = Boundary::periodic;

  static Grid2D unit_square(int n, Boundary bc);

  double dx() const noexcept { return (x1 - x0) / nx; }
  double dy() const noexcept { return (y1 - y0) / ny; }
  double x(int i) const noexcept { return x0 + (i + 0.5) * dx(); }
  double y(int j) const noexcept { return y0 + (j + 0.5) * dy(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * nx + i; }
  double cell_area() const noexcept { return dx() * dy(); }

  /// Displacement from a to b, using the nearest periodic image on a torus.
  void displacement(double ax, double ay, double bx, double by, double& ddx, double& ddy) const noexcept;

  /// Throws std::invalid_argument unless nx, ny >= 16 and the extents are positive.
  void validate() const;
};

struct Diagnostics {
  double energy = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  /// u stayed inside [alpha_- - eta0, alpha_+ + eta0] at the last evaluation.
  bool in_invariant_region = true;
};

struct SimState {
  Grid2D grid;
  std::vector<double> u;
  double time = 0.0;
  double epsilon = 0.0;
  std::int64_t step_count = 0;
  Diagnostics diagnostics;

  double at(int i, int j) const noexcept { return u[grid.index(i, j)]; }
};

// ---------------------------------------------------------------------------
// Initial data

/// Smoothed step around a circle: inner value inside, outer outside, alpha on the circle.
struct CircleInit {
  double cx = 0.5, cy = 0.5;
  double radius = 0.25;
  double inner = -1.0;
  double outer = 1.0;
  double width = 1.0;  ///< step width in units of epsilon
};

/// Pointwise samples of an explicit function u0(x, y).
struct FunctionInit {
  std::function<double(double, double)> u0;
};

/// u0 = U0(dbar(x) / eps) for a signed distance dbar (positive on the alpha_+ side).
struct ProfileInit {
  std::shared_ptr<const StandingWave> wave;
  std::function<double(double, double)> signed_distance;
};

using InitialData = std::variant<CircleInit, FunctionInit, ProfileInit>;

/// Signed distance to a circle, torus-aware through grid.displacement().
std::function<double(double, double)> circle_distance(const Grid2D& grid, double cx, double cy,
                                                      double radius);

SimState init_state(const Grid2D& grid, double epsilon, const InitialData& init,
                    const BistableModel& model);

// ---------------------------------------------------------------------------
// Solver

enum class Scheme { explicit_euler, imex_linearized };

struct FixedDt {
  double dt;
};
struct AutoDt {
  double safety = 0.4;
};

struct SolverConfig {
  std::variant<FixedDt, AutoDt> dt_policy = AutoDt{};
  Scheme scheme = Scheme::explicit_euler;
  int record_every = 100;
  /// Energy and extrema are refreshed every this many steps (and the energy checked).
  int diagnostics_every = 1;
  /// Drop diffusion and advance the pointwise reaction ODE with classical RK4.
  bool reaction_only = false;
  double energy_slack = 1e-12;
};

/// Stability-limited time step for the given state (safety 1 = the explicit limit).
double stable_dt(const SimState& state, const BistableModel& model, double safety);

/// Time step the config prescribes for this state. Fixed steps beyond the explicit
/// limit are rejected for the explicit scheme.
double resolve_dt(const SolverConfig& config, const SimState& state, const BistableModel& model);

/// Discrete distorted-gradient-flow energy
/// sum [ |grad_h phi(u)|^2 / 2 + W(u) / eps^2 ] * cell_area, forward differences.
double energy(const SimState& state, const BistableModel& model);

/// Refreshes energy and extrema.
void update_diagnostics(SimState& state, const BistableModel& model);

/// Advances one step of size resolve_dt(config, state, model) (or `dt_override` if > 0).
void step(SimState& state, const SolverConfig& config, const BistableModel& model,
          double dt_override = 0.0);

struct SeriesRow {
  double time;
  std::int64_t step;
  double energy;
  double u_min;
  double u_max;
};

using Observer = std::function<void(const SimState&)>;

struct RunResult {
  SimState state;
  std::vector<SeriesRow> series;
};

/// Steps to exactly t_end, recording diagnostics and calling observers at step 0,
/// every record_every steps and at the end.
RunResult run(SimState state, const SolverConfig& config, const BistableModel& model, double t_end,
              const std::vector<Observer>& observers = {});

struct ComparisonResult {
  bool ordered = true;
  double max_violation = 0.0;  ///< max over time of max(lo - hi, 0)
};

/// Steps lo and hi in lockstep with a common dt and tracks order violations.
ComparisonResult comparison_run(SimState lo, SimState hi, const SolverConfig& config,
                                const BistableModel& model, double t_end, double tol = 1e-10);

// ---------------------------------------------------------------------------
// I/O

/// Flat little-endian binary: int64 nx, int64 ny, f64 dx, dy, time, epsilon,
/// then nx*ny f64 values with x varying fastest.
void write_snapshot(const std::string& path, const SimState& state);

struct Snapshot {
  std::int64_t nx = 0, ny = 0;
  double dx = 0, dy = 0, time = 0, epsilon = 0;
  std::vector<double> u;
};
Snapshot read_snapshot(const std::string& path);

/// CSV with header time,step,energy,u_min,u_max.
void write_series_csv(const std::string& path, const std::vector<SeriesRow>& series);

}  // namespace ndac
