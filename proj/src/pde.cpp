#include "ndac/pde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ndac {

Boundary parse_boundary(const std::string& name) {
  if (name == "neumann") return Boundary::neumann;
  if (name == "periodic") return Boundary::periodic;
  throw std::invalid_argument("unknown boundary condition '" + name + "'");
}

std::string to_string(Boundary bc) { return bc == Boundary::neumann ? "neumann" : "periodic"; }

Grid2D Grid2D::unit_square(int n, Boundary bc) {
  Grid2D g;
  g.nx = g.ny = n;
  g.bc = bc;
  return g;
}

void Grid2D::displacement(double ax, double ay, double bx, double by, double& ddx,
                          double& ddy) const noexcept {
  ddx = bx - ax;
  ddy = by - ay;
  if (bc == Boundary::periodic) {
    const double lx = x1 - x0;
    const double ly = y1 - y0;
    ddx -= lx * std::round(ddx / lx);
    ddy -= ly * std::round(ddy / ly);
  }
}

void Grid2D::validate() const {
  if (nx < 16 || ny < 16) throw std::invalid_argument("Grid2D: nx and ny must be >= 16");
  if (!(x1 > x0 && y1 > y0)) throw std::invalid_argument("Grid2D: empty domain");
}

namespace {

// Sums per-row partials pairwise in a fixed order.
double tree_sum(std::vector<double>& parts) {
  if (parts.empty()) return 0.0;
  std::size_t n = parts.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i + half < n; ++i) parts[i] += parts[i + half];
    n = half;
  }
  return parts[0];
}

struct Neighbours {
  int west, east, south, north;
};

inline int wrap_or_clamp(int k, int n, Boundary bc) {
  if (k < 0) return bc == Boundary::periodic ? n - 1 : 0;
  if (k >= n) return bc == Boundary::periodic ? 0 : n - 1;
  return k;
}

// out = lap_h(in), ghost cells mirror (Neumann) or wrap (periodic).
void apply_laplacian(const Grid2D& g, const std::vector<double>& in, std::vector<double>& out) {
  const int nx = g.nx;
  const int ny = g.ny;
  const double idx2 = 1.0 / (g.dx() * g.dx());
  const double idy2 = 1.0 / (g.dy() * g.dy());
  const int last = nx - 1;
  const int west_edge = wrap_or_clamp(-1, nx, g.bc);
  const int east_edge = wrap_or_clamp(nx, nx, g.bc);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    const double* c = in.data() + static_cast<std::size_t>(j) * nx;
    const double* s = in.data() + static_cast<std::size_t>(wrap_or_clamp(j - 1, ny, g.bc)) * nx;
    const double* n = in.data() + static_cast<std::size_t>(wrap_or_clamp(j + 1, ny, g.bc)) * nx;
    double* o = out.data() + static_cast<std::size_t>(j) * nx;
    o[0] = (c[1] + c[west_edge] - 2.0 * c[0]) * idx2 + (n[0] + s[0] - 2.0 * c[0]) * idy2;
    for (int i = 1; i < last; ++i)
      o[i] = (c[i + 1] + c[i - 1] - 2.0 * c[i]) * idx2 + (n[i] + s[i] - 2.0 * c[i]) * idy2;
    o[last] = (c[east_edge] + c[last - 1] - 2.0 * c[last]) * idx2 +
              (n[last] + s[last] - 2.0 * c[last]) * idy2;
  }
}

void check_finite(const SimState& s) {
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    if (!std::isfinite(s.u[k])) {
      std::ostringstream os;
      os << "non-finite value at cell (" << k % s.grid.nx << ", " << k / s.grid.nx << ") after step "
         << s.step_count;
      throw NumericalError(os.str());
    }
  }
}

struct DtCache {
  double lo = 0, hi = 0, dphi = 0, dfabs = 0;
  std::vector<double> phi, f;
  bool matches(const BistableModel& m) const {
    return m.phi_poly().coeffs() == phi && m.f_poly().coeffs() == f;
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b, int nx, int ny) {
  std::vector<double> rows(ny);
  for (int j = 0; j < ny; ++j) {
    double s = 0.0;
    const std::size_t off = static_cast<std::size_t>(j) * nx;
    for (int i = 0; i < nx; ++i) s += a[off + i] * b[off + i];
    rows[j] = s;
  }
  return tree_sum(rows);
}

}  // namespace

std::function<double(double, double)> circle_distance(const Grid2D& grid, double cx, double cy,
                                                      double radius) {
  return [grid, cx, cy, radius](double x, double y) {
    double ddx, ddy;
    grid.displacement(cx, cy, x, y, ddx, ddy);
    return std::hypot(ddx, ddy) - radius;
  };
}

SimState init_state(const Grid2D& grid, double epsilon, const InitialData& init,
                    const BistableModel& model) {
  grid.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("init_state: epsilon must be positive");
  SimState s;
  s.grid = grid;
  s.epsilon = epsilon;
  s.u.resize(grid.size());

  std::function<double(double, double)> sample;
  if (const auto* c = std::get_if<CircleInit>(&init)) {
    const auto dist = circle_distance(grid, c->cx, c->cy, c->radius);
    const double a = model.alpha();
    const CircleInit ci = *c;
    sample = [dist, ci, a, epsilon](double x, double y) {
      const double t = std::tanh(dist(x, y) / (ci.width * epsilon));
      return t >= 0.0 ? a + (ci.outer - a) * t : a + (a - ci.inner) * t;
    };
  } else if (const auto* fi = std::get_if<FunctionInit>(&init)) {
    sample = fi->u0;
  } else {
    const auto& pi = std::get<ProfileInit>(init);
    if (!pi.wave) throw std::invalid_argument("init_state: profile initializer without a wave");
    sample = [pi, epsilon](double x, double y) { return pi.wave->value(pi.signed_distance(x, y) / epsilon); };
  }

  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double v = sample(grid.x(i), grid.y(j));
      if (!(v >= model.working_lo() && v <= model.working_hi())) {
        std::ostringstream os;
        os << "init_state: initial value " << v << " at cell (" << i << ", " << j
           << ") outside the working interval";
        throw std::invalid_argument(os.str());
      }
      s.u[grid.index(i, j)] = v;
    }
  }
  update_diagnostics(s, model);
  return s;
}

double stable_dt(const SimState& s, const BistableModel& m, double safety) {
  // The explicit scheme is monotone below this limit, so u stays inside the hull
  // of [alpha_-, alpha_+] and its initial range; the bounds use that hull.
  const auto [mn, mx] = std::minmax_element(s.u.begin(), s.u.end());
  const double lo = std::min(m.alpha_minus(), *mn);
  const double hi = std::max(m.alpha_plus(), *mx);
  thread_local DtCache cache;
  if (!cache.matches(m) || cache.lo != lo || cache.hi != hi) {
    cache = {lo, hi, m.max_phi_prime(lo, hi), m.max_abs_f_prime(lo, hi), m.phi_poly().coeffs(),
             m.f_poly().coeffs()};
  }
  const double h2 = std::min(s.grid.dx() * s.grid.dx(), s.grid.dy() * s.grid.dy());
  const double eps2 = s.epsilon * s.epsilon;
  return safety * std::min(h2 / (4.0 * cache.dphi), eps2 / cache.dfabs);
}

double resolve_dt(const SolverConfig& cfg, const SimState& s, const BistableModel& m) {
  if (const auto* a = std::get_if<AutoDt>(&cfg.dt_policy)) {
    if (cfg.reaction_only) {
      thread_local DtCache cache;
      if (!cache.matches(m) || cache.lo != m.working_lo() || cache.hi != m.working_hi()) {
        cache = {m.working_lo(), m.working_hi(), 0.0, m.max_abs_f_prime(m.working_lo(), m.working_hi()),
                 m.phi_poly().coeffs(), m.f_poly().coeffs()};
      }
      return a->safety * s.epsilon * s.epsilon / cache.dfabs;
    }
    return stable_dt(s, m, a->safety);
  }
  const double dt = std::get<FixedDt>(cfg.dt_policy).dt;
  if (!(dt > 0.0)) throw std::invalid_argument("resolve_dt: fixed dt must be positive");
  if (cfg.scheme == Scheme::explicit_euler && !cfg.reaction_only && dt > stable_dt(s, m, 1.0))
    throw std::invalid_argument("resolve_dt: fixed dt exceeds the explicit stability limit");
  return dt;
}

double energy(const SimState& s, const BistableModel& m) {
  const Grid2D& g = s.grid;
  const int nx = g.nx;
  const int ny = g.ny;
  std::vector<double> phi(s.u.size());
  m.phi_poly().evaluate(s.u.data(), phi.data(), phi.size());
  const double idx2 = 1.0 / (g.dx() * g.dx());
  const double idy2 = 1.0 / (g.dy() * g.dy());
  const double ieps2 = 1.0 / (s.epsilon * s.epsilon);
  const bool periodic = g.bc == Boundary::periodic;
  std::vector<double> rows(ny);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    const bool top = j == ny - 1;
    const int jn = top ? (periodic ? 0 : j) : j + 1;
    const double* c = phi.data() + static_cast<std::size_t>(j) * nx;
    const double* n = phi.data() + static_cast<std::size_t>(jn) * nx;
    std::vector<double> w(nx);
    m.potential_poly().evaluate(s.u.data() + static_cast<std::size_t>(j) * nx, w.data(), nx);
    double acc = 0.0;
    for (int i = 0; i < nx; ++i) {
      const int ie = i == nx - 1 ? (periodic ? 0 : i) : i + 1;
      const double gx = c[ie] - c[i];
      const double gy = n[i] - c[i];
      acc += 0.5 * (gx * gx * idx2 + gy * gy * idy2) + w[i] * ieps2;
    }
    rows[j] = acc;
  }
  return tree_sum(rows) * g.cell_area();
}

void update_diagnostics(SimState& s, const BistableModel& m) {
  const auto [mn, mx] = std::minmax_element(s.u.begin(), s.u.end());
  s.diagnostics.u_min = *mn;
  s.diagnostics.u_max = *mx;
  s.diagnostics.energy = energy(s, m);
  s.diagnostics.in_invariant_region =
      *mn >= m.alpha_minus() - m.eta0() && *mx <= m.alpha_plus() + m.eta0();
}

namespace {

void explicit_update(SimState& s, const BistableModel& m, double dt, std::vector<double>& phi,
                     std::vector<double>&) {
  const Grid2D& g = s.grid;
  const int nx = g.nx;
  const int ny = g.ny;
  m.phi_poly().evaluate(s.u.data(), phi.data(), s.u.size());
  const double cx = dt / (g.dx() * g.dx());
  const double cy = dt / (g.dy() * g.dy());
  const double cr = dt / (s.epsilon * s.epsilon);
  const int last = nx - 1;
  const int west_edge = wrap_or_clamp(-1, nx, g.bc);
  const int east_edge = wrap_or_clamp(nx, nx, g.bc);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    thread_local std::vector<double> react;
    react.resize(nx);
    double* u = s.u.data() + static_cast<std::size_t>(j) * nx;
    m.f_poly().evaluate(u, react.data(), nx);
    const double* c = phi.data() + static_cast<std::size_t>(j) * nx;
    const double* so = phi.data() + static_cast<std::size_t>(wrap_or_clamp(j - 1, ny, g.bc)) * nx;
    const double* no = phi.data() + static_cast<std::size_t>(wrap_or_clamp(j + 1, ny, g.bc)) * nx;
    const double* r = react.data();
    u[0] += cx * (c[1] + c[west_edge] - 2.0 * c[0]) + cy * (no[0] + so[0] - 2.0 * c[0]) + cr * r[0];
    for (int i = 1; i < last; ++i)
      u[i] += cx * (c[i + 1] + c[i - 1] - 2.0 * c[i]) + cy * (no[i] + so[i] - 2.0 * c[i]) + cr * r[i];
    u[last] += cx * (c[east_edge] + c[last - 1] - 2.0 * c[last]) + cy * (no[last] + so[last] - 2.0 * c[last]) +
               cr * r[last];
  }
}

void reaction_rk4(SimState& s, const BistableModel& m, double dt) {
  const double h = dt / (s.epsilon * s.epsilon);
  for (auto& y : s.u) {
    const double k1 = m.f(y);
    const double k2 = m.f(y + 0.5 * h * k1);
    const double k3 = m.f(y + 0.5 * h * k2);
    const double k4 = m.f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
}

// delta - dt lap(phi'(u) delta) = dt (lap phi(u) + f(u)/eps^2), solved for w = phi'(u) delta,
// which makes the operator diag(1/a) - dt lap symmetric positive definite.
void imex_update(SimState& s, const BistableModel& m, double dt, std::vector<double>& phi,
                 std::vector<double>& lap) {
  const Grid2D& g = s.grid;
  const std::size_t n = s.u.size();
  for (std::size_t k = 0; k < n; ++k) phi[k] = m.phi(s.u[k]);
  apply_laplacian(g, phi, lap);
  const double ieps2 = 1.0 / (s.epsilon * s.epsilon);
  std::vector<double> inva(n), b(n), w(n), r(n), z(n), p(n), ap(n), tmp(n);
  const double diag_lap = 2.0 / (g.dx() * g.dx()) + 2.0 / (g.dy() * g.dy());
  for (std::size_t k = 0; k < n; ++k) {
    const double a = m.phi_prime(s.u[k]);
    inva[k] = 1.0 / a;
    b[k] = dt * (lap[k] + m.f(s.u[k]) * ieps2);
    w[k] = a * b[k];
  }
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    apply_laplacian(g, x, tmp);
    for (std::size_t k = 0; k < n; ++k) y[k] = inva[k] * x[k] - dt * tmp[k];
  };
  apply(w, ap);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
  const double bnorm = std::sqrt(dot(b, b, g.nx, g.ny));
  auto precond = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t k = 0; k < n; ++k) y[k] = x[k] / (inva[k] + dt * diag_lap);
  };
  precond(r, z);
  p = z;
  double rz = dot(r, z, g.nx, g.ny);
  for (int it = 0; it < 500; ++it) {
    if (std::sqrt(dot(r, r, g.nx, g.ny)) <= 1e-13 * bnorm + 1e-300) break;
    apply(p, ap);
    const double alpha = rz / dot(p, ap, g.nx, g.ny);
    for (std::size_t k = 0; k < n; ++k) {
      w[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    precond(r, z);
    const double rz_new = dot(r, z, g.nx, g.ny);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  for (std::size_t k = 0; k < n; ++k) s.u[k] += w[k] * inva[k];
}

}  // namespace

void step(SimState& s, const SolverConfig& cfg, const BistableModel& m, double dt_override) {
  const double dt = dt_override > 0.0 ? dt_override : resolve_dt(cfg, s, m);
  thread_local std::vector<double> phi, lap;
  phi.resize(s.u.size());
  lap.resize(s.u.size());

  if (cfg.reaction_only)
    reaction_rk4(s, m, dt);
  else if (cfg.scheme == Scheme::explicit_euler)
    explicit_update(s, m, dt, phi, lap);
  else
    imex_update(s, m, dt, phi, lap);

  s.time += dt;
  ++s.step_count;
  check_finite(s);

  if (cfg.diagnostics_every > 0 && s.step_count % cfg.diagnostics_every == 0) {
    const double previous = s.diagnostics.energy;
    update_diagnostics(s, m);
    const double slack = cfg.energy_slack * std::max(1.0, std::abs(previous));
    if (!cfg.reaction_only && s.diagnostics.energy > previous + slack) {
      std::ostringstream os;
      os.precision(17);
      os << "energy increased from " << previous << " to " << s.diagnostics.energy << " at step "
         << s.step_count << " (stability violation)";
      throw NumericalError(os.str());
    }
  }
}

RunResult run(SimState state, const SolverConfig& cfg, const BistableModel& m, double t_end,
              const std::vector<Observer>& observers) {
  if (!(t_end > state.time)) throw std::invalid_argument("run: t_end must exceed the current time");
  RunResult out;
  auto record = [&]() {
    update_diagnostics(state, m);
    const auto& d = state.diagnostics;
    out.series.push_back({state.time, state.step_count, d.energy, d.u_min, d.u_max});
    for (const auto& obs : observers) obs(state);
  };
  record();
  const double tol = 1e-12 * t_end;
  std::int64_t since_record = 0;
  // The explicit scheme keeps u inside the hull used by stable_dt, so the step
  // found at the start stays admissible; the IMEX step is re-derived every time.
  const bool fixed_step = cfg.scheme == Scheme::explicit_euler || cfg.reaction_only;
  const double dt_run = fixed_step ? resolve_dt(cfg, state, m) : 0.0;
  while (state.time < t_end - tol) {
    double dt = fixed_step ? dt_run : resolve_dt(cfg, state, m);
    if (state.time + dt > t_end - tol) dt = t_end - state.time;
    step(state, cfg, m, dt);
    if (cfg.record_every > 0 && ++since_record == cfg.record_every) {
      since_record = 0;
      if (state.time < t_end - tol) record();
    }
  }
  record();
  out.state = std::move(state);
  return out;
}

ComparisonResult comparison_run(SimState lo, SimState hi, const SolverConfig& cfg,
                                const BistableModel& m, double t_end, double tol) {
  if (lo.grid.nx != hi.grid.nx || lo.grid.ny != hi.grid.ny || lo.epsilon != hi.epsilon)
    throw std::invalid_argument("comparison_run: states must share grid and epsilon");
  ComparisonResult res;
  auto track = [&]() {
    for (std::size_t k = 0; k < lo.u.size(); ++k)
      res.max_violation = std::max(res.max_violation, lo.u[k] - hi.u[k]);
  };
  track();
  const double eps = 1e-12 * t_end;
  const bool fixed_step = cfg.scheme == Scheme::explicit_euler || cfg.reaction_only;
  const double dt_run = std::min(resolve_dt(cfg, lo, m), resolve_dt(cfg, hi, m));
  while (lo.time < t_end - eps) {
    double dt = fixed_step ? dt_run : std::min(resolve_dt(cfg, lo, m), resolve_dt(cfg, hi, m));
    if (lo.time + dt > t_end - eps) dt = t_end - lo.time;
    step(lo, cfg, m, dt);
    step(hi, cfg, m, dt);
    track();
  }
  res.ordered = res.max_violation <= tol;
  return res;
}

// ---------------------------------------------------------------------------

void write_snapshot(const std::string& path, const SimState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write snapshot '" + path + "'");
  const std::int64_t dims[2] = {s.grid.nx, s.grid.ny};
  const double header[4] = {s.grid.dx(), s.grid.dy(), s.time, s.epsilon};
  os.write(reinterpret_cast<const char*>(dims), sizeof dims);
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  os.write(reinterpret_cast<const char*>(s.u.data()),
           static_cast<std::streamsize>(s.u.size() * sizeof(double)));
  if (!os) throw std::runtime_error("short write to '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read snapshot '" + path + "'");
  Snapshot snap;
  std::int64_t dims[2];
  double header[4];
  is.read(reinterpret_cast<char*>(dims), sizeof dims);
  is.read(reinterpret_cast<char*>(header), sizeof header);
  if (!is || dims[0] <= 0 || dims[1] <= 0) throw std::runtime_error("bad snapshot header in '" + path + "'");
  snap.nx = dims[0];
  snap.ny = dims[1];
  snap.dx = header[0];
  snap.dy = header[1];
  snap.time = header[2];
  snap.epsilon = header[3];
  snap.u.resize(static_cast<std::size_t>(snap.nx * snap.ny));
  is.read(reinterpret_cast<char*>(snap.u.data()), static_cast<std::streamsize>(snap.u.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated snapshot '" + path + "'");
  return snap;
}

void write_series_csv(const std::string& path, const std::vector<SeriesRow>& series) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os.precision(17);
  os << "time,step,energy,u_min,u_max\n";
  for (const auto& r : series)
    os << r.time << ',' << r.step << ',' << r.energy << ',' << r.u_min << ',' << r.u_max << '\n';
}

}  // namespace ndac
