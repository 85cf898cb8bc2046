#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ndac/geometry.hpp"
#include "ndac/mcf.hpp"
#include "ndac/model.hpp"
#include "ndac/pde.hpp"
#include "ndac/profiles.hpp"

namespace ndac {

/// One experiment, read from a JSON file (schema in docs/config.md).
struct ExperimentSpec {
  std::string kind = "coeffs";  ///< coeffs | generation | propagation | profile | barriers | all
  std::string model = "linear-cubic";
  ModelParams params;

  int grid = 256;                 ///< cells per side of the unit square
  double cells_per_epsilon = 0.0; ///< > 0: grid = cells_per_epsilon / eps, rounded up to a multiple of 16
  Boundary bc = Boundary::periodic;
  std::vector<double> epsilons = {0.04, 0.02, 0.01};

  std::string initial = "sine";   ///< sine | circle | profile-circle | constant
  double amplitude = 0.5;         ///< sine: u0 = alpha + amplitude sin(2 pi x) sin(2 pi y)
  double constant = 1.0;          ///< constant: u0 = constant
  double cx = 0.5, cy = 0.5, radius = 0.25;
  double noise = 0.0;             ///< uniform perturbation amplitude added to u0
  unsigned seed = 0;

  double t_end = 0.0;             ///< 0: t_eps (generation) or t_fraction * extinction time
  double t_fraction = 0.6;
  double eta = 0.0;               ///< 0: 0.05 (alpha_+ - alpha_-)
  double rho = 2.0;
  int samples = 12;

  Scheme scheme = Scheme::explicit_euler;
  double safety = 0.4;
  bool reaction_only = false;
  int diagnostics_every = 50;

  double barrier_epsilon = 0.05;
  double propagation_barrier_epsilon = 0.01;

  std::string out_dir = "out";
};

/// Parses JSON text; unknown keys are rejected. Throws std::invalid_argument.
ExperimentSpec parse_spec(const std::string& json_text);
ExperimentSpec load_spec(const std::string& path);
/// Throws std::invalid_argument if the epsilon list is not strictly decreasing or
/// a referenced name does not resolve.
void validate_spec(const ExperimentSpec& spec);

/// t_eps = mu^-1 eps^2 |ln eps|.
double generation_time(const BistableModel& model, double epsilon);
int grid_for_epsilon(const ExperimentSpec& spec, double epsilon);
double default_eta(const BistableModel& model);

/// u0 as a function of position, including the seeded perturbation.
std::function<double(double, double)> initial_function(const ExperimentSpec& spec,
                                                       const BistableModel& model, const Grid2D& grid);

// ---------------------------------------------------------------------------
// Reports

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string experiment;
  std::vector<Table> tables;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool all_passed() const;
  void append(const Report& other);
};

std::string format_number(double v);

/// Writes one CSV per table plus summary.txt into out_dir (created if missing).
/// Returns 0 iff every check passed. Throws std::runtime_error if out_dir is unwritable.
int emit_report(const Report& report, const std::string& out_dir);

// ---------------------------------------------------------------------------
// Experiments

struct CoefficientRow {
  std::string model_name;
  TransportCoefficients coeffs;
  double lambda0_profile = 0.0;
  double wave_residual = 0.0;
};
CoefficientRow coefficient_row(const BistableModel& model);
Report run_coeffs(const ExperimentSpec& spec, bool whole_registry = false);

struct GenerationRow {
  double epsilon = 0.0;
  double t_eps = 0.0;
  int grid = 0;
  double fraction_in_range = 0.0;  ///< cells in [alpha_- - eta, alpha_+ + eta]
  double fraction_near_wells = 0.0;  ///< cells within eta of alpha_- or alpha_+
  double violation_range = 0.0;    ///< max distance outside [alpha_- - eta, alpha_+ + eta]
  double m0 = 0.0;                 ///< smallest scanned M0 for which both one-sided conditions hold
  double runtime_s = 0.0;
};

struct GenerationReport {
  double eta = 0.0;
  std::vector<GenerationRow> rows;
};

/// Integrates to t_eps for each epsilon and checks the three generation conditions.
GenerationReport run_generation(const ExperimentSpec& spec);

/// Smallest M0 in {1, 1.01, 1.02, ...} with: u0 >= alpha + M0 eps implies u >= alpha_+ - eta,
/// and u0 <= alpha - M0 eps implies u <= alpha_- + eta.
double fit_m0(const std::vector<double>& u0, const std::vector<double>& u, const BistableModel& model,
              double epsilon, double eta);

Report generation_report(const GenerationReport& rep);

struct InterfaceSample {
  double time = 0.0;
  double radius_law = 0.0;
  double hausdorff = 0.0;
  double width = 0.0;
  double sup_error = 0.0;
  bool graph = false;
  double normal_offset = 0.0;
  bool extinct = false;
};

struct InterfaceRun {
  double epsilon = 0.0;
  int grid = 0;
  double t_eps = 0.0;
  double t_end = 0.0;
  double runtime_s = 0.0;
  bool truncated = false;
  std::vector<InterfaceSample> samples;
};

struct InterfaceStudy {
  std::string model_name;
  double lambda0 = 0.0;
  double eta = 0.0;
  double rho = 2.0;
  std::vector<InterfaceRun> runs;
};

/// Shrinking-circle runs for every epsilon, sampled on [t_eps, T] (plus rho t_eps):
/// Hausdorff distance to the circle law, interface width, profile cross-section error
/// and the graph check against the circle law.
InterfaceStudy run_interface_study(const ExperimentSpec& spec);

Report propagation_report(const InterfaceStudy& study);
Report profile_report(const InterfaceStudy& study);
Report run_propagation(const ExperimentSpec& spec);
Report run_profile(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Barriers

/// w(x, t) = Y(t / eps^2, u0(x) + sign eps^2 C2 (exp(mu t / eps^2) - 1)).
double generation_barrier(const BistableModel& model, const std::function<double(double, double)>& u0,
                          double epsilon, double c2, int sign, double x, double y, double t);

/// L(w) = w_t - lap phi(w) - f(w) / eps^2 by finite differences with spacing h and time step dt.
double barrier_residual(const BistableModel& model, double epsilon,
                        const std::function<double(double, double, double)>& w, double x, double y,
                        double t, double h, double dt);

struct MarginScan {
  double parameter = 0.0;   ///< C2 for generation barriers, L for propagation barriers
  double margin = 0.0;      ///< min over samples of L(w+) and -L(w-)
  double worst_x = 0.0, worst_y = 0.0, worst_t = 0.0;
};

struct GenerationBarrierReport {
  double epsilon = 0.0;
  std::vector<MarginScan> scan;
  double threshold_c2 = 0.0;  ///< first scanned C2 with positive margin (0 if none)
};
GenerationBarrierReport check_generation_barriers(const ExperimentSpec& spec);

struct PropagationBarrierConstants {
  double b = 0.0;
  double beta = 0.0;
  double sigma0 = 0.0, sigma1 = 0.0, sigma2 = 0.0;  ///< sigma2 estimated with C_r = 0
  double sigma = 0.0;
  double K = 1.0;
};

struct PropagationBarrierReport {
  double epsilon = 0.0;
  PropagationBarrierConstants constants;
  std::vector<MarginScan> scan;       ///< over L, with q
  std::vector<MarginScan> scan_no_q;  ///< same L values with sigma = 0
  double chosen_L = 0.0;              ///< first L with a positive margin (0 if none)
};

PropagationBarrierConstants propagation_barrier_constants(const BistableModel& model, const StandingWave& wave);
PropagationBarrierReport check_propagation_barriers(const ExperimentSpec& spec);

Report barriers_report(const GenerationBarrierReport& gen, const PropagationBarrierReport& prop);
Report run_barriers(const ExperimentSpec& spec);

/// Dispatches on spec.kind ("all" runs every experiment).
Report run_experiment(const ExperimentSpec& spec);

}  // namespace ndac
