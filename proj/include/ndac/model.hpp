#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ndac/errors.hpp"
#include "ndac/polynomial.hpp"

namespace ndac {

/// Nonlinear diffusion phi and bistable reaction f of u_t = lap(phi(u)) + f(u)/eps^2.
///
/// Both functions are polynomials so every derivative is exact. The object is
/// immutable after construction; scalar constants (c_phi, mu, stiffness bounds)
/// are measured once on the working interval [alpha_- - 1, alpha_+ + 1].
class BistableModel {
public:
  BistableModel(std::string name, Polynomial phi, Polynomial f, double alpha_minus, double alpha,
                double alpha_plus);

  const std::string& name() const noexcept { return name_; }

  double phi(double u) const noexcept { return phi_(u); }
  double phi_prime(double u) const noexcept { return dphi_(u); }
  double phi_second(double u) const noexcept { return d2phi_(u); }
  double phi_third(double u) const noexcept { return d3phi_(u); }
  double f(double u) const noexcept { return f_(u); }
  double f_prime(double u) const noexcept { return df_(u); }
  double f_second(double u) const noexcept { return d2f_(u); }

  const Polynomial& phi_poly() const noexcept { return phi_; }
  const Polynomial& f_poly() const noexcept { return f_; }

  double alpha_minus() const noexcept { return alpha_minus_; }
  double alpha() const noexcept { return alpha_; }
  double alpha_plus() const noexcept { return alpha_plus_; }
  double jump() const noexcept { return alpha_plus_ - alpha_minus_; }

  /// min phi' sampled on the working interval.
  double c_phi() const noexcept { return c_phi_; }
  /// f'(alpha), the instability rate of the middle zero.
  double mu() const noexcept { return mu_; }
  double eta0() const noexcept { return std::min(alpha_ - alpha_minus_, alpha_plus_ - alpha_); }

  double working_lo() const noexcept { return alpha_minus_ - 1.0; }
  double working_hi() const noexcept { return alpha_plus_ + 1.0; }

  /// max phi' and max |f'| over [lo, hi] by dense sampling.
  double max_phi_prime(double lo, double hi) const;
  double max_abs_f_prime(double lo, double hi) const;
  double min_f_prime(double lo, double hi) const;

  /// Exact polynomial form of the double-well potential, P(alpha_-) - P(u)
  /// with P' = f phi'. Its derivative is exactly -f phi', which the grid
  /// energy relies on.
  double potential_exact(double u) const noexcept { return w_(u); }
  const Polynomial& potential_poly() const noexcept { return w_; }

private:
  std::string name_;
  Polynomial phi_, dphi_, d2phi_, d3phi_;
  Polynomial f_, df_, d2f_;
  Polynomial w_;
  double alpha_minus_, alpha_, alpha_plus_;
  double c_phi_ = 0.0;
  double mu_ = 0.0;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool accepted() const noexcept;
  /// Multi-line human-readable listing.
  std::string summary() const;
};

/// Checks zeros, slopes, sign pattern, phi' lower bound, and the equal-area balance.
ValidationReport validate_model(const BistableModel& candidate, double tol = 1e-8);

/// validate_model, throwing ModelError with the report summary on rejection.
void require_valid(const BistableModel& candidate, double tol = 1e-8);

/// W(u) = -int_{alpha_-}^u f phi' by adaptive quadrature, evaluated from the nearer
/// well so that W(alpha_+-) is exactly zero. Throws QuadratureError on non-convergence.
double potential(const BistableModel& model, double u);

struct PotentialSample {
  std::vector<double> u_grid;
  std::vector<double> w_values;
};

/// W sampled on n uniformly spaced points spanning [alpha_-, alpha_+].
PotentialSample sample_potential(const BistableModel& model, int n);

struct ReactionFlow {
  double y = 0.0;
  double y_zeta = 0.0;  ///< dY/dzeta via exp(int_0^tau f'(Y))
};

/// Solves Y_tau = f(Y), Y(0) = zeta, together with the variational exponent.
ReactionFlow reaction_flow_Y(const BistableModel& model, double tau, double zeta);

// ---------------------------------------------------------------------------
// Registry of built-in models.

using ModelParams = std::map<std::string, std::vector<double>>;

/// Names: "linear-cubic" {scale}, "cubic-flux", "skewed-flux",
/// "polynomial" {phi, f, alphas}. Throws ModelError on unknown names or bad params.
BistableModel make_model(const std::string& name, const ModelParams& params = {});

/// The built-in models with default parameters.
std::vector<BistableModel> registry_models();

}  // namespace ndac
