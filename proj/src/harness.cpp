#include "ndac/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ndac {

using json = nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Scheme parse_scheme(const std::string& s) {
  if (s == "explicit_euler" || s == "explicit") return Scheme::explicit_euler;
  if (s == "imex_linearized" || s == "imex") return Scheme::imex_linearized;
  throw std::invalid_argument("unknown scheme '" + s + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

const std::set<std::string> kinds = {"coeffs", "generation", "propagation", "profile", "barriers", "all"};
const std::set<std::string> initials = {"sine", "circle", "profile-circle", "constant"};

bool is_identity_phi(const BistableModel& m) {
  return m.phi_poly().degree() == 1 && m.phi(0.0) == 0.0 && m.phi_prime(0.0) == 1.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment configs

ExperimentSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::set<std::string> known = {
      "kind", "model", "params", "grid", "cells_per_epsilon", "bc", "epsilons", "initial",
      "amplitude", "constant", "center", "radius", "noise", "seed", "t_end", "t_fraction", "eta",
      "rho", "samples", "scheme", "safety", "reaction_only", "diagnostics_every",
      "barrier_epsilon", "propagation_barrier_epsilon", "out_dir"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }

  ExperimentSpec s;
  try {
    read(j, "kind", s.kind);
    read(j, "model", s.model);
    if (j.contains("params")) {
      for (const auto& [key, value] : j.at("params").items()) {
        if (value.is_number())
          s.params[key] = {value.get<double>()};
        else
          s.params[key] = value.get<std::vector<double>>();
      }
    }
    read(j, "grid", s.grid);
    read(j, "cells_per_epsilon", s.cells_per_epsilon);
    if (j.contains("bc")) s.bc = parse_boundary(j.at("bc").get<std::string>());
    read(j, "epsilons", s.epsilons);
    read(j, "initial", s.initial);
    read(j, "amplitude", s.amplitude);
    read(j, "constant", s.constant);
    if (j.contains("center")) {
      const auto c = j.at("center").get<std::vector<double>>();
      if (c.size() != 2) throw std::invalid_argument("center must have two entries");
      s.cx = c[0];
      s.cy = c[1];
    }
    read(j, "radius", s.radius);
    read(j, "noise", s.noise);
    read(j, "seed", s.seed);
    read(j, "t_end", s.t_end);
    read(j, "t_fraction", s.t_fraction);
    read(j, "eta", s.eta);
    read(j, "rho", s.rho);
    read(j, "samples", s.samples);
    if (j.contains("scheme")) s.scheme = parse_scheme(j.at("scheme").get<std::string>());
    read(j, "safety", s.safety);
    read(j, "reaction_only", s.reaction_only);
    read(j, "diagnostics_every", s.diagnostics_every);
    read(j, "barrier_epsilon", s.barrier_epsilon);
    read(j, "propagation_barrier_epsilon", s.propagation_barrier_epsilon);
    read(j, "out_dir", s.out_dir);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  validate_spec(s);
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_spec(ss.str());
}

void validate_spec(const ExperimentSpec& s) {
  if (!kinds.count(s.kind)) throw std::invalid_argument("unknown experiment kind '" + s.kind + "'");
  if (!initials.count(s.initial)) throw std::invalid_argument("unknown initial data '" + s.initial + "'");
  try {
    make_model(s.model, s.params);
  } catch (const ModelError& e) {
    throw std::invalid_argument(e.what());
  }
  if (s.epsilons.empty()) throw std::invalid_argument("epsilon list is empty");
  for (std::size_t k = 0; k < s.epsilons.size(); ++k) {
    if (!(s.epsilons[k] > 0.0 && s.epsilons[k] < 1.0))
      throw std::invalid_argument("epsilon values must lie in (0, 1)");
    if (k > 0 && !(s.epsilons[k] < s.epsilons[k - 1]))
      throw std::invalid_argument("epsilon list must be strictly decreasing");
  }
  if (s.grid < 16) throw std::invalid_argument("grid must be >= 16");
  if (s.cells_per_epsilon < 0.0) throw std::invalid_argument("cells_per_epsilon must be >= 0");
  if (!(s.rho > 1.0)) throw std::invalid_argument("rho must exceed 1");
  if (s.samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (!(s.safety > 0.0 && s.safety <= 1.0)) throw std::invalid_argument("safety must lie in (0, 1]");
  if (!(s.t_fraction > 0.0 && s.t_fraction < 1.0)) throw std::invalid_argument("t_fraction must lie in (0, 1)");
  if (s.t_end < 0.0) throw std::invalid_argument("t_end must be >= 0");
  if (!(s.radius > 0.0)) throw std::invalid_argument("radius must be positive");
}

double generation_time(const BistableModel& m, double eps) { return eps * eps * std::abs(std::log(eps)) / m.mu(); }

int grid_for_epsilon(const ExperimentSpec& spec, double eps) {
  if (spec.cells_per_epsilon <= 0.0) return spec.grid;
  const int n = static_cast<int>(std::ceil(spec.cells_per_epsilon / eps - 1e-9));
  return std::max(16, (n + 15) / 16 * 16);
}

double default_eta(const BistableModel& m) { return 0.05 * m.jump(); }

std::function<double(double, double)> initial_function(const ExperimentSpec& spec, const BistableModel& m,
                                                       const Grid2D& grid) {
  std::function<double(double, double)> base;
  const double a = m.alpha();
  if (spec.initial == "sine") {
    const double amp = spec.amplitude;
    base = [a, amp](double x, double y) { return a + amp * std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y); };
  } else if (spec.initial == "constant") {
    const double c = spec.constant;
    base = [c](double, double) { return c; };
  } else {
    const auto dist = circle_distance(grid, spec.cx, spec.cy, spec.radius);
    const double lo = m.alpha_minus(), hi = m.alpha_plus();
    base = [dist, lo, hi](double x, double y) { return dist(x, y) < 0.0 ? lo : hi; };
  }
  if (spec.noise == 0.0) return base;

  // Perturbation drawn once per cell so the field is reproducible for a given seed.
  auto table = std::make_shared<std::vector<double>>(grid.size());
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> dist(-spec.noise, spec.noise);
  for (auto& v : *table) v = dist(rng);
  return [base, table, grid](double x, double y) {
    const int i = std::clamp(static_cast<int>(std::floor((x - grid.x0) / grid.dx())), 0, grid.nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((y - grid.y0) / grid.dy())), 0, grid.ny - 1);
    return base(x, y) + (*table)[grid.index(i, j)];
  };
}

// ---------------------------------------------------------------------------
// Reports

bool Report::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

void Report::append(const Report& other) {
  tables.insert(tables.end(), other.tables.begin(), other.tables.end());
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  notes.insert(notes.end(), other.notes.begin(), other.notes.end());
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

int emit_report(const Report& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw std::runtime_error("cannot create output directory '" + out_dir + "'");

  for (const auto& t : report.tables) {
    const fs::path path = fs::path(out_dir) / (t.name + ".csv");
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
    os << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
      os << '\n';
    }
  }

  const fs::path summary = fs::path(out_dir) / "summary.txt";
  std::ofstream os(summary);
  if (!os) throw std::runtime_error("cannot write '" + summary.string() + "'");
  os << "experiment: " << report.experiment << '\n';
  for (const auto& c : report.checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  for (const auto& n : report.notes) os << "note: " << n << '\n';
  const std::size_t failed =
      std::count_if(report.checks.begin(), report.checks.end(), [](const Check& c) { return !c.passed; });
  os << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << '\n';
  if (!os) throw std::runtime_error("short write to '" + summary.string() + "'");
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Coefficients

CoefficientRow coefficient_row(const BistableModel& m) {
  CoefficientRow row;
  row.model_name = m.name();
  row.coeffs = compute_transport_coefficients(m);
  const WaveGrid g = default_wave_grid(m);
  const StandingWave w = compute_standing_wave(m, g.half_width, g.dz);
  row.lambda0_profile = compute_lambda0_profile(w, m);
  row.wave_residual = standing_wave_residual(w, m);
  return row;
}

Report run_coeffs(const ExperimentSpec& spec, bool whole_registry) {
  Report rep;
  rep.experiment = "coeffs";
  Table t{"coeffs",
          {"model_name", "lambda0", "mobility", "surface_tension", "lambda0_alt", "identity_residual",
           "wave_residual"},
          {}};
  std::vector<BistableModel> models;
  if (whole_registry)
    models = registry_models();
  else
    models.push_back(make_model(spec.model, spec.params));
  for (const auto& m : models) {
    require_valid(m);
    const CoefficientRow r = coefficient_row(m);
    t.rows.push_back({r.model_name, format_number(r.coeffs.lambda0), format_number(r.coeffs.mobility),
                      format_number(r.coeffs.surface_tension), format_number(r.lambda0_profile),
                      format_number(r.coeffs.identity_residual()), format_number(r.wave_residual)});
    rep.checks.push_back({"identity " + r.model_name, r.coeffs.identity_residual() <= 1e-7,
                          "|lambda0 - mobility*surface_tension| = " + format_number(r.coeffs.identity_residual())});
    const double diff = std::abs(r.coeffs.lambda0 - r.lambda0_profile);
    rep.checks.push_back({"lambda0 cross-formula " + r.model_name, diff <= 1e-5,
                          "|lambda0 - lambda0_alt| = " + format_number(diff)});
    if (is_identity_phi(m)) {
      const double e = std::abs(r.coeffs.lambda0 - 1.0);
      rep.checks.push_back({"lambda0 linear diffusion " + r.model_name, e <= 1e-8,
                            "|lambda0 - 1| = " + format_number(e)});
    }
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

// ---------------------------------------------------------------------------
// Generation

double fit_m0(const std::vector<double>& u0, const std::vector<double>& u, const BistableModel& m,
              double eps, double eta) {
  const double a = m.alpha();
  double need = -std::numeric_limits<double>::infinity();  // M0 eps must exceed this
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] < m.alpha_plus() - eta) need = std::max(need, u0[k] - a);
    if (u[k] > m.alpha_minus() + eta) need = std::max(need, a - u0[k]);
  }
  need += 1e-12 * std::abs(need);
  int k = 0;
  if (need > eps) k = std::max(0, static_cast<int>(std::floor((need / eps - 1.0) / 0.01)) - 1);
  while ((1.0 + 0.01 * k) * eps <= need) ++k;
  return 1.0 + 0.01 * k;
}

GenerationReport run_generation(const ExperimentSpec& spec) {
  const BistableModel m = make_model(spec.model, spec.params);
  require_valid(m);
  GenerationReport rep;
  rep.eta = spec.eta > 0.0 ? spec.eta : default_eta(m);
  for (double eps : spec.epsilons) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid2D grid = Grid2D::unit_square(grid_for_epsilon(spec, eps), spec.bc);
    const auto fn = initial_function(spec, m, grid);
    SimState s = init_state(grid, eps, FunctionInit{fn}, m);
    const std::vector<double> u0 = s.u;
    const auto [mn, mx] = std::minmax_element(u0.begin(), u0.end());
    if (*mn >= m.alpha() && *mx <= m.alpha())
      throw std::invalid_argument("run_generation: initial data has no phase on either side of alpha");

    SolverConfig cfg;
    cfg.dt_policy = AutoDt{spec.safety};
    cfg.scheme = spec.scheme;
    cfg.reaction_only = spec.reaction_only;
    cfg.record_every = 0;
    cfg.diagnostics_every = spec.diagnostics_every;
    const double t_eps = spec.t_end > 0.0 ? spec.t_end : generation_time(m, eps);
    s = run(std::move(s), cfg, m, t_eps).state;

    GenerationRow row;
    row.epsilon = eps;
    row.t_eps = t_eps;
    row.grid = grid.nx;
    std::size_t in_range = 0, near = 0;
    const double lo = m.alpha_minus() - rep.eta, hi = m.alpha_plus() + rep.eta;
    for (double v : s.u) {
      if (v >= lo && v <= hi) ++in_range;
      if (std::abs(v - m.alpha_minus()) <= rep.eta || std::abs(v - m.alpha_plus()) <= rep.eta) ++near;
      row.violation_range = std::max({row.violation_range, v - hi, lo - v});
    }
    row.fraction_in_range = static_cast<double>(in_range) / s.u.size();
    row.fraction_near_wells = static_cast<double>(near) / s.u.size();
    row.m0 = fit_m0(u0, s.u, m, eps, rep.eta);
    row.runtime_s = seconds_since(t0);
    rep.rows.push_back(row);
  }
  return rep;
}

Report generation_report(const GenerationReport& g) {
  Report rep;
  rep.experiment = "generation";
  Table t{"generation",
          {"epsilon", "t_eps", "grid", "fraction_in_range", "fraction_near_wells", "violation_range", "m0"},
          {}};
  double mmin = std::numeric_limits<double>::infinity(), mmax = 0.0;
  bool range_ok = true;
  for (const auto& r : g.rows) {
    t.rows.push_back({format_number(r.epsilon), format_number(r.t_eps), std::to_string(r.grid),
                      format_number(r.fraction_in_range), format_number(r.fraction_near_wells),
                      format_number(r.violation_range), format_number(r.m0)});
    rep.notes.push_back("generation eps=" + format_number(r.epsilon) + " runtime " + format_number(r.runtime_s) +
                        " s");
    range_ok = range_ok && r.violation_range <= 0.0;
    mmin = std::min(mmin, r.m0);
    mmax = std::max(mmax, r.m0);
  }
  rep.tables.push_back(std::move(t));
  if (!g.rows.empty()) {
    rep.checks.push_back({"generation range", range_ok, "all cells in [alpha_- - eta, alpha_+ + eta] at t_eps"});
    const double variation = mmax / mmin - 1.0;
    rep.checks.push_back({"generation M0 stability", variation < 0.5,
                          "max/min - 1 = " + format_number(variation) + " (M0 in [" + format_number(mmin) + ", " +
                              format_number(mmax) + "])"});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Interface motion and profile

InterfaceStudy run_interface_study(const ExperimentSpec& spec) {
  const BistableModel m = make_model(spec.model, spec.params);
  require_valid(m);
  InterfaceStudy study;
  study.model_name = m.name();
  study.lambda0 = compute_lambda0(m).value;
  study.eta = spec.eta > 0.0 ? spec.eta : default_eta(m);
  study.rho = spec.rho;
  const WaveGrid wg = default_wave_grid(m);
  const auto wave = std::make_shared<const StandingWave>(compute_standing_wave(m, wg.half_width, wg.dz));
  const CircleLaw law{spec.cx, spec.cy, spec.radius, study.lambda0};
  const double t_end = spec.t_end > 0.0 ? spec.t_end : spec.t_fraction * law.extinction_time();

  for (double eps : spec.epsilons) {
    const auto t0 = std::chrono::steady_clock::now();
    InterfaceRun ir;
    ir.epsilon = eps;
    ir.grid = grid_for_epsilon(spec, eps);
    ir.t_eps = generation_time(m, eps);
    ir.t_end = t_end;
    const Grid2D grid = Grid2D::unit_square(ir.grid, spec.bc);

    InitialData init;
    if (spec.initial == "profile-circle")
      init = ProfileInit{wave, circle_distance(grid, spec.cx, spec.cy, spec.radius)};
    else if (spec.initial == "circle")
      init = CircleInit{spec.cx, spec.cy, spec.radius, m.alpha_minus(), m.alpha_plus(), 1.0};
    else
      throw std::invalid_argument("interface study needs circle or profile-circle initial data");
    SimState s = init_state(grid, eps, init, m);

    std::vector<double> times;
    for (int k = 0; k <= spec.samples; ++k) times.push_back(ir.t_eps + (t_end - ir.t_eps) * k / spec.samples);
    times.push_back(spec.rho * ir.t_eps);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    SolverConfig cfg;
    cfg.dt_policy = AutoDt{spec.safety};
    cfg.scheme = spec.scheme;
    cfg.record_every = 0;
    cfg.diagnostics_every = spec.diagnostics_every;

    for (double t : times) {
      if (t > t_end) break;
      if (t > s.time) s = run(std::move(s), cfg, m, t).state;
      InterfaceSample smp;
      smp.time = s.time;
      const Contour c = extract_contour(s, m.alpha());
      if (c.empty() || s.time >= law.extinction_time()) {
        smp.extinct = true;
        ir.truncated = true;
        ir.samples.push_back(smp);
        break;
      }
      smp.radius_law = circle_radius(law, s.time);
      const Contour ref = contour_from_polyline(circle_polygon(law, s.time, 2048));
      smp.hausdorff = front_distance(c, ref);
      smp.width = interface_width(s, m, study.eta, c);
      if (s.time >= spec.rho * ir.t_eps * (1.0 - 1e-12)) {
        smp.sup_error = cross_section(s, c, *wave, eps);
        if (c.loops.size() == 1 && c.chains.empty()) {
          const GraphCheck g = is_graph_over(c, ref);
          smp.graph = g.is_graph;
          smp.normal_offset = g.max_normal_offset;
        }
      }
      ir.samples.push_back(smp);
    }
    ir.runtime_s = seconds_since(t0);
    study.runs.push_back(std::move(ir));
  }
  return study;
}

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_number(v[k]);
  return s;
}

}  // namespace

Report propagation_report(const InterfaceStudy& st) {
  Report rep;
  rep.experiment = "propagation";
  Table t{"propagation_" + st.model_name,
          {"epsilon", "grid", "t_eps", "t_end", "samples", "max_hausdorff", "hausdorff_over_eps", "max_width",
           "width_over_eps", "truncated"},
          {}};
  Table series{"propagation_series_" + st.model_name,
               {"epsilon", "time", "radius_law", "hausdorff", "width", "sup_error", "graph", "normal_offset"},
               {}};
  std::vector<double> dist, ratio, wratio;
  bool truncated = false;
  for (const auto& r : st.runs) {
    double h = 0.0, w = 0.0;
    for (const auto& s : r.samples) {
      series.rows.push_back({format_number(r.epsilon), format_number(s.time), format_number(s.radius_law),
                             format_number(s.hausdorff), format_number(s.width), format_number(s.sup_error),
                             s.graph ? "1" : "0", format_number(s.normal_offset)});
      if (s.extinct) continue;
      h = std::max(h, s.hausdorff);
      w = std::max(w, s.width);
    }
    truncated = truncated || r.truncated;
    dist.push_back(h);
    ratio.push_back(h / r.epsilon);
    wratio.push_back(w / r.epsilon);
    t.rows.push_back({format_number(r.epsilon), std::to_string(r.grid), format_number(r.t_eps),
                      format_number(r.t_end), std::to_string(r.samples.size()), format_number(h),
                      format_number(h / r.epsilon), format_number(w), format_number(w / r.epsilon),
                      r.truncated ? "1" : "0"});
    rep.notes.push_back("propagation " + st.model_name + " eps=" + format_number(r.epsilon) + " runtime " +
                        format_number(r.runtime_s) + " s");
  }
  rep.tables.push_back(std::move(t));
  rep.tables.push_back(std::move(series));
  const std::string tag = " (" + st.model_name + ")";
  rep.checks.push_back({"propagation not truncated" + tag, !truncated, "interface present at every sample time"});
  rep.checks.push_back({"propagation Hausdorff decreasing" + tag, strictly_decreasing(dist), "max distance: " + join(dist)});
  const double rmax = ratio.empty() ? 0.0 : *std::max_element(ratio.begin(), ratio.end());
  rep.checks.push_back({"propagation Hausdorff/eps <= 10" + tag, rmax <= 10.0, "ratios: " + join(ratio)});
  if (!wratio.empty()) {
    const double wmax = *std::max_element(wratio.begin(), wratio.end());
    const double wmin = *std::min_element(wratio.begin(), wratio.end());
    rep.checks.push_back({"propagation width/eps bounded" + tag, wmin > 0.0 && wmax <= 1.5 * wmin,
                          "width/eps: " + join(wratio) + " (max/min must be <= 1.5)"});
  }
  return rep;
}

Report profile_report(const InterfaceStudy& st) {
  Report rep;
  rep.experiment = "profile";
  Table t{"profile_" + st.model_name,
          {"epsilon", "grid", "t_from", "t_end", "max_sup_error", "first_sup_error", "last_sup_error", "graph_all",
           "max_normal_offset"},
          {}};
  std::vector<double> sup;
  bool graph_all = true;
  double last_sup = 0.0;
  double jump_band = 0.0;
  for (const auto& r : st.runs) {
    double e = 0.0, off = 0.0, first = -1.0, last = 0.0;
    bool g = true;
    int counted = 0;
    for (const auto& s : r.samples) {
      if (s.extinct || s.time < st.rho * r.t_eps * (1.0 - 1e-12)) continue;
      e = std::max(e, s.sup_error);
      off = std::max(off, s.normal_offset);
      if (first < 0.0) first = s.sup_error;
      last = s.sup_error;
      g = g && s.graph;
      ++counted;
    }
    g = g && counted > 0;
    graph_all = graph_all && g;
    sup.push_back(e);
    last_sup = e;
    t.rows.push_back({format_number(r.epsilon), std::to_string(r.grid), format_number(st.rho * r.t_eps),
                      format_number(r.t_end), format_number(e), format_number(std::max(first, 0.0)),
                      format_number(last), g ? "1" : "0", format_number(off)});
  }
  rep.tables.push_back(std::move(t));
  const std::string tag = " (" + st.model_name + ")";
  if (!st.runs.empty()) {
    const BistableModel m = make_model(st.model_name);
    jump_band = 0.1 * m.jump();
  }
  rep.checks.push_back({"profile sup error decreasing" + tag, strictly_decreasing(sup), "sup errors: " + join(sup)});
  rep.checks.push_back({"profile sup error at smallest eps" + tag, last_sup <= jump_band,
                        format_number(last_sup) + " <= " + format_number(jump_band)});
  rep.checks.push_back({"profile graph over circle law" + tag, graph_all, "every sampled time"});
  return rep;
}

Report run_propagation(const ExperimentSpec& spec) { return propagation_report(run_interface_study(spec)); }
Report run_profile(const ExperimentSpec& spec) { return profile_report(run_interface_study(spec)); }

// ---------------------------------------------------------------------------
// Barriers

double generation_barrier(const BistableModel& m, const std::function<double(double, double)>& u0, double eps,
                          double c2, int sign, double x, double y, double t) {
  const double tau = t / (eps * eps);
  const double zeta = u0(x, y) + sign * eps * eps * c2 * std::expm1(m.mu() * tau);
  if (tau == 0.0) return zeta;
  return reaction_flow_Y(m, tau, zeta).y;
}

double barrier_residual(const BistableModel& m, double eps, const std::function<double(double, double, double)>& w,
                        double x, double y, double t, double h, double dt) {
  const double c = w(x, y, t);
  const double wt = (-3.0 * c + 4.0 * w(x, y, t + dt) - w(x, y, t + 2.0 * dt)) / (2.0 * dt);
  const double pc = m.phi(c);
  const double lap = (m.phi(w(x + h, y, t)) + m.phi(w(x - h, y, t)) + m.phi(w(x, y + h, t)) +
                      m.phi(w(x, y - h, t)) - 4.0 * pc) /
                     (h * h);
  return wt - lap - m.f(c) / (eps * eps);
}

GenerationBarrierReport check_generation_barriers(const ExperimentSpec& spec) {
  const BistableModel m = make_model(spec.model, spec.params);
  require_valid(m);
  GenerationBarrierReport rep;
  const double eps = spec.barrier_epsilon;
  rep.epsilon = eps;
  const double a = m.alpha();
  const double amp = spec.amplitude;
  const std::function<double(double, double)> u0 = [a, amp](double x, double y) {
    return a + amp * std::sin(2 * M_PI * x) * std::sin(2 * M_PI * y);
  };
  const double t_eps = generation_time(m, eps);
  const double h = 0.005 * eps;
  const double dt = 1e-4 * eps * eps / m.mu();
  const int np = 12;
  const int nt = 8;

  for (double c2 = 1.0; c2 <= 1024.0; c2 *= 2.0) {
    MarginScan sc;
    sc.parameter = c2;
    sc.margin = std::numeric_limits<double>::infinity();
    for (int sign : {1, -1}) {
      const auto w = [&](double x, double y, double t) { return generation_barrier(m, u0, eps, c2, sign, x, y, t); };
      for (int k = 0; k <= nt; ++k) {
        const double t = t_eps * k / nt;
        for (int j = 0; j < np; ++j) {
          for (int i = 0; i < np; ++i) {
            const double x = (i + 0.5) / np, y = (j + 0.5) / np;
            const double margin = sign * barrier_residual(m, eps, w, x, y, t, h, dt);
            if (margin < sc.margin) {
              sc.margin = margin;
              sc.worst_x = x;
              sc.worst_y = y;
              sc.worst_t = t;
            }
          }
        }
      }
    }
    rep.scan.push_back(sc);
    if (sc.margin > 0.0 && rep.threshold_c2 == 0.0) rep.threshold_c2 = c2;
    if (rep.threshold_c2 > 0.0 && c2 >= 4.0 * rep.threshold_c2) break;
  }
  return rep;
}

PropagationBarrierConstants propagation_barrier_constants(const BistableModel& m, const StandingWave& w) {
  PropagationBarrierConstants k;
  const std::size_t n = w.z_grid.size();
  std::vector<double> e(n), dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = w.u0[i], uz = w.u0_z[i];
    const double uzz = (-m.f(u) - m.phi_second(u) * uz * uz) / m.phi_prime(u);
    e[i] = m.f_prime(u) + m.phi_third(u) * uz * uz + m.phi_second(u) * uzz;
    dist[i] = std::min(u - w.alpha_minus, w.alpha_plus - u);
  }
  double b_max = 0.5 * m.jump();
  for (std::size_t i = 0; i < n; ++i)
    if (e[i] >= 0.0) b_max = std::min(b_max, dist[i]);
  k.b = 0.5 * b_max;
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    if (dist[i] <= k.b) sup = std::max(sup, e[i]);
  k.beta = -sup / 3.0;

  k.sigma0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = 3.0 * k.beta + e[i];
    if (denom > 0.0) k.sigma0 = std::min(k.sigma0, w.u0_z[i] / denom);
  }
  k.sigma1 = 1.0 / (2.0 * (k.beta + 1.0));
  double f2 = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double u = m.working_lo() + (m.working_hi() - m.working_lo()) * i / 4000.0;
    f2 = std::max(f2, std::abs(m.f_second(u)));
  }
  k.sigma2 = k.beta / (f2 * (k.beta + 1.0));
  k.sigma = 0.5 * std::min({k.sigma0, k.sigma1, k.sigma2});
  k.K = 1.0;
  return k;
}

PropagationBarrierReport check_propagation_barriers(const ExperimentSpec& spec) {
  const BistableModel m = make_model(spec.model, spec.params);
  require_valid(m);
  PropagationBarrierReport rep;
  const double eps = spec.propagation_barrier_epsilon;
  rep.epsilon = eps;
  const double width = expected_wave_width(m);
  const StandingWave wave = compute_standing_wave(m, 25.0 * width, 0.001 * width);
  const double lambda0 = compute_lambda0(m).value;
  const Corrector u1 = compute_corrector(wave, m, lambda0, 1.0);
  rep.constants = propagation_barrier_constants(m, wave);
  const auto& k = rep.constants;

  const CircleLaw law{spec.cx, spec.cy, spec.radius, lambda0};
  const double t_end = spec.t_fraction * law.extinction_time();
  const double d0 = std::min(10.0 * eps, 0.5 * circle_radius(law, t_end));
  const double h = 0.005 * eps;
  const double dt = 1e-3 * eps * eps / std::max(k.beta, 1.0);
  const double theta = 0.3;
  const int nr = 81;
  const int nt = 10;

  auto scan = [&](double sigma, double L) {
    MarginScan sc;
    sc.parameter = L;
    sc.margin = std::numeric_limits<double>::infinity();
    for (int sign : {1, -1}) {
      const auto w = [&](double x, double y, double t) {
        const double r = std::hypot(x - law.cx, y - law.cy);
        const double d = r - circle_radius(law, t);
        const double decay = std::exp(-k.beta * t / (eps * eps));
        const double grow = std::exp(L * t);
        const double p = -decay + grow + k.K;
        const double q = sigma * (k.beta * decay + eps * eps * L * grow);
        const double z = (d + sign * eps * p) / eps;
        return wave.value(z) + eps * u1.value(z) / r + sign * q;
      };
      for (int it = 0; it <= nt; ++it) {
        const double t = t_end * it / nt;
        const double rad = circle_radius(law, t);
        for (int ir = 0; ir < nr; ++ir) {
          const double r = rad - d0 + 2.0 * d0 * ir / (nr - 1);
          const double x = law.cx + r * std::cos(theta), y = law.cy + r * std::sin(theta);
          const double margin = sign * barrier_residual(m, eps, w, x, y, t, h, dt);
          if (margin < sc.margin) {
            sc.margin = margin;
            sc.worst_x = x;
            sc.worst_y = y;
            sc.worst_t = t;
          }
        }
      }
    }
    return sc;
  };

  for (double L = 0.5; eps * eps * L * std::exp(L * t_end) <= 1.0; L *= 2.0) {
    const MarginScan with_q = scan(k.sigma, L);
    rep.scan.push_back(with_q);
    rep.scan_no_q.push_back(scan(0.0, L));
    if (with_q.margin > 0.0 && rep.chosen_L == 0.0) rep.chosen_L = L;
  }
  return rep;
}

Report barriers_report(const GenerationBarrierReport& gen, const PropagationBarrierReport& prop) {
  Report rep;
  rep.experiment = "barriers";
  Table g{"barriers_generation", {"epsilon", "c2", "margin", "worst_x", "worst_y", "worst_t"}, {}};
  for (const auto& s : gen.scan)
    g.rows.push_back({format_number(gen.epsilon), format_number(s.parameter), format_number(s.margin),
                      format_number(s.worst_x), format_number(s.worst_y), format_number(s.worst_t)});
  Table p{"barriers_propagation",
          {"epsilon", "L", "sigma", "margin", "margin_no_q", "worst_x", "worst_y", "worst_t", "worst_x_no_q",
           "worst_y_no_q", "worst_t_no_q"},
          {}};
  double worst_no_q = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prop.scan.size(); ++i) {
    const auto& a = prop.scan[i];
    const auto& b = prop.scan_no_q[i];
    worst_no_q = std::min(worst_no_q, b.margin);
    p.rows.push_back({format_number(prop.epsilon), format_number(a.parameter), format_number(prop.constants.sigma),
                      format_number(a.margin), format_number(b.margin), format_number(a.worst_x),
                      format_number(a.worst_y), format_number(a.worst_t), format_number(b.worst_x),
                      format_number(b.worst_y), format_number(b.worst_t)});
  }
  const auto& k = prop.constants;
  Table c{"barriers_constants", {"b", "beta", "sigma0", "sigma1", "sigma2_upper", "sigma", "K", "chosen_L"}, {}};
  c.rows.push_back({format_number(k.b), format_number(k.beta), format_number(k.sigma0), format_number(k.sigma1),
                    format_number(k.sigma2), format_number(k.sigma), format_number(k.K), format_number(prop.chosen_L)});
  rep.tables = {g, p, c};

  rep.checks.push_back({"generation barrier margin", gen.threshold_c2 > 0.0,
                        gen.threshold_c2 > 0.0 ? "positive margin from C2 = " + format_number(gen.threshold_c2)
                                               : "no scanned C2 gave a positive margin"});
  // Every scanned L must fail without q, otherwise q would not be needed for that L.
  bool all_break = !prop.scan_no_q.empty();
  for (const auto& s : prop.scan_no_q) all_break = all_break && s.margin < 0.0;
  rep.checks.push_back({"propagation barrier needs q", all_break,
                        "min margin with sigma = 0: " + format_number(worst_no_q)});
  rep.notes.push_back("propagation barrier with q: first positive margin at L = " + format_number(prop.chosen_L) +
                      " (0 means none in the scanned range)");
  rep.notes.push_back("admissible sigma estimate: (0, " +
                      format_number(std::min({k.sigma0, k.sigma1, k.sigma2})) + "], sigma2 taken with C_r = 0");
  return rep;
}

Report run_barriers(const ExperimentSpec& spec) {
  return barriers_report(check_generation_barriers(spec), check_propagation_barriers(spec));
}

Report run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);
  if (spec.kind == "coeffs") return run_coeffs(spec);
  if (spec.kind == "generation") return generation_report(run_generation(spec));
  if (spec.kind == "propagation") return run_propagation(spec);
  if (spec.kind == "profile") return run_profile(spec);
  if (spec.kind == "barriers") return run_barriers(spec);

  Report all;
  all.experiment = "all";
  all.append(run_coeffs(spec, true));
  ExperimentSpec gen = spec;
  gen.initial = "sine";
  all.append(generation_report(run_generation(gen)));
  ExperimentSpec circ = spec;
  if (circ.initial != "circle") circ.initial = "profile-circle";
  const InterfaceStudy st = run_interface_study(circ);
  all.append(propagation_report(st));
  all.append(profile_report(st));
  all.append(run_barriers(spec));
  return all;
}

}  // namespace ndac
