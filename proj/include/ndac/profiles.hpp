#pragma once

#include <vector>

#include "ndac/model.hpp"

namespace ndac {

/// Increasing standing wave U0 on a uniform grid symmetric about z = 0.
///
/// Values beyond the grid follow the fitted exponential asymptotes, so value()
/// and derivative() are defined on all of R.
struct StandingWave {
  double dz = 0.0;
  std::vector<double> z_grid;
  std::vector<double> u0;
  std::vector<double> u0_z;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double lambda1 = 0.0;           ///< min of the two fitted tail rates
  double lambda1_left = 0.0;      ///< fitted decay rate as z -> -inf
  double lambda1_right = 0.0;     ///< fitted decay rate as z -> +inf
  double lambda1_linearized = 0.0;  ///< sqrt(-f'/phi') at the slower well, for comparison
  double tail_amplitude = 0.0;    ///< C0hat with |U0z| <= C0hat exp(-lambda1 |z|) on the grid

  std::size_t center() const noexcept { return z_grid.size() / 2; }
  double half_width() const noexcept { return z_grid.back(); }

  /// Cubic Hermite interpolation of U0 (exponential extension off-grid).
  double value(double z) const;
  double derivative(double z) const;
  /// Smallest z with U0(z) >= level, by bisection on value(). level in (alpha_-, alpha_+).
  double inverse(double level) const;
};

struct WaveGrid {
  double half_width;
  double dz;
};

/// Width 1/lambda1 of the slower tail from the linearization at the wells.
double expected_wave_width(const BistableModel& model);

/// A grid satisfying the preconditions of compute_standing_wave with margin.
WaveGrid default_wave_grid(const BistableModel& model);

/// Integrates phi'(u) u_z = sqrt(2 W(u)) outward from U0(0) = alpha with RK4.
StandingWave compute_standing_wave(const BistableModel& model, double half_width, double dz);

/// Max interior |(phi(U0))_zz + f(U0)| by second-order centered differences.
double standing_wave_residual(const StandingWave& wave, const BistableModel& model);

struct Lambda0 {
  double value = 0.0;
  double error = 0.0;
};

/// lambda0 = int phi' sqrt(W) / int sqrt(W) over [alpha_-, alpha_+].
Lambda0 compute_lambda0(const BistableModel& model);

/// lambda0 = int (phi'(U0) U0z)^2 / int phi'(U0) U0z^2 over z, from a sampled profile.
double compute_lambda0_profile(const StandingWave& wave, const BistableModel& model);

double compute_mobility(const BistableModel& model);
double compute_surface_tension(const BistableModel& model);

struct TransportCoefficients {
  double lambda0 = 0.0;
  double mobility = 0.0;
  double surface_tension = 0.0;
  double phi_star = 0.0;
  double err_lambda0 = 0.0;
  double err_mobility = 0.0;
  double err_surface_tension = 0.0;

  /// |lambda0 - mobility * surface_tension|
  double identity_residual() const noexcept;
};

TransportCoefficients compute_transport_coefficients(const BistableModel& model);

/// First-order inner corrector U1 for a given curvature term laplacian_d.
struct Corrector {
  std::vector<double> z_grid;
  std::vector<double> u1;
  std::vector<double> u1_z;  ///< centred differences of u1, used for Hermite interpolation
  std::vector<double> v1;  ///< phi'(U0) U1
  double solvability_residual = 0.0;  ///< int (lambda0/phi'(U0) - 1) V0z^2 dz
  double derivative_jump = 0.0;       ///< V1z(0+) - V1z(0-)

  double value(double z) const;
  double derivative(double z) const;
};

Corrector compute_corrector(const StandingWave& wave, const BistableModel& model, double lambda0,
                            double laplacian_d);

}  // namespace ndac
