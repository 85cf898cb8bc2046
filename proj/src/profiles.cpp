#include "ndac/profiles.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ndac/quadrature.hpp"

namespace ndac {

namespace {

constexpr double kTailCutoff = 1e-9;

double hermite(double x0, double h, double y0, double y1, double d0, double d1, double x) {
  const double t = (x - x0) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

double hermite_slope(double x0, double h, double y0, double y1, double d0, double d1, double x) {
  const double t = (x - x0) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * y1 +
          (3 * t2 - 2 * t) * h * d1) /
         h;
}

// Slope and coefficient of determination of a least-squares line through (x, y).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit fit;
  const double den = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ybar = sy / n;
  double ss_tot = 0, ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// Trapezoid over the wave grid plus exponential tails g_end / (2 lambda) at both ends.
double integrate_over_wave(const StandingWave& w, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += g[k];
  s -= 0.5 * (g.front() + g.back());
  s *= w.dz;
  s += g.front() / (2.0 * w.lambda1_left) + g.back() / (2.0 * w.lambda1_right);
  return s;
}

struct WellIntegrals {
  QuadratureResult sqrt_w;      // int sqrt(W)
  QuadratureResult phi_sqrt_w;  // int phi' sqrt(W)
  double inner_error = 0.0;     // worst absolute error of a nested W evaluation
};

WellIntegrals well_integrals(const BistableModel& m) {
  WellIntegrals out;
  double worst = 0.0;
  auto sqrt_w = [&](double u) {
    const double w = potential(m, u);
    if (w < -1e-14) {
      std::ostringstream os;
      os << "negative potential W(" << u << ") = " << w;
      throw NumericalError(os.str());
    }
    return std::sqrt(std::max(w, 0.0));
  };
  // Integrands are polynomial of modest degree inside the nested rule, so the
  // inner Kronrod estimate is near round-off.
  worst = 1e-16 * m.jump();
  out.sqrt_w = integrate(sqrt_w, m.alpha_minus(), m.alpha_plus(), 1e-9);
  out.phi_sqrt_w = integrate([&](double u) { return m.phi_prime(u) * sqrt_w(u); }, m.alpha_minus(),
                             m.alpha_plus(), 1e-9);
  out.inner_error = worst;
  return out;
}

double phi_star(const BistableModel& m) {
  return (m.phi(m.alpha_plus()) - m.phi(m.alpha_minus())) / m.jump();
}

}  // namespace

// ---------------------------------------------------------------------------
// StandingWave

double StandingWave::value(double z) const {
  const double z0 = z_grid.front();
  const double z1 = z_grid.back();
  if (z <= z0) return alpha_minus + (u0.front() - alpha_minus) * std::exp(lambda1_left * (z - z0));
  if (z >= z1) return alpha_plus - (alpha_plus - u0.back()) * std::exp(-lambda1_right * (z - z1));
  const auto k = std::min(static_cast<std::size_t>((z - z0) / dz), z_grid.size() - 2);
  return hermite(z_grid[k], dz, u0[k], u0[k + 1], u0_z[k], u0_z[k + 1], z);
}

double StandingWave::derivative(double z) const {
  const double z0 = z_grid.front();
  const double z1 = z_grid.back();
  if (z <= z0) return lambda1_left * (value(z) - alpha_minus);
  if (z >= z1) return lambda1_right * (alpha_plus - value(z));
  const auto k = std::min(static_cast<std::size_t>((z - z0) / dz), z_grid.size() - 2);
  return hermite_slope(z_grid[k], dz, u0[k], u0[k + 1], u0_z[k], u0_z[k + 1], z);
}

double StandingWave::inverse(double level) const {
  if (!(level > alpha_minus && level < alpha_plus))
    throw std::domain_error("StandingWave::inverse: level outside (alpha_-, alpha_+)");
  double lo = z_grid.front();
  double hi = z_grid.back();
  while (value(lo) > level) lo *= 2.0;
  while (value(hi) < level) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double expected_wave_width(const BistableModel& m) {
  const double lm = std::sqrt(-m.f_prime(m.alpha_minus()) / m.phi_prime(m.alpha_minus()));
  const double lp = std::sqrt(-m.f_prime(m.alpha_plus()) / m.phi_prime(m.alpha_plus()));
  return 1.0 / std::min(lm, lp);
}

WaveGrid default_wave_grid(const BistableModel& m) {
  const double width = expected_wave_width(m);
  return {25.0 * width, 0.005 * width};
}

StandingWave compute_standing_wave(const BistableModel& m, double half_width, double dz) {
  const double width = expected_wave_width(m);
  if (!(half_width >= 20.0 * width * (1 - 1e-12)))
    throw std::invalid_argument("compute_standing_wave: half_width must be >= 20 * wave width");
  if (!(dz > 0.0 && dz <= 0.01 * width * (1 + 1e-12)))
    throw std::invalid_argument("compute_standing_wave: dz must be in (0, 0.01 * wave width]");

  const auto n = static_cast<std::size_t>(std::ceil(half_width / dz - 1e-9));
  StandingWave w;
  w.dz = dz;
  w.alpha_minus = m.alpha_minus();
  w.alpha_plus = m.alpha_plus();
  w.z_grid.resize(2 * n + 1);
  for (std::size_t k = 0; k < w.z_grid.size(); ++k)
    w.z_grid[k] = (static_cast<double>(k) - static_cast<double>(n)) * dz;
  w.u0.assign(w.z_grid.size(), m.alpha());
  w.u0_z.assign(w.z_grid.size(), 0.0);

  auto slope = [&](double u) {
    const double wu = potential(m, std::clamp(u, m.alpha_minus(), m.alpha_plus()));
    if (wu < -1e-14) {
      std::ostringstream os;
      os << "compute_standing_wave: W(" << u << ") = " << wu << " < 0";
      throw NumericalError(os.str());
    }
    return std::sqrt(2.0 * std::max(wu, 0.0)) / m.phi_prime(u);
  };

  // Integrate one side; returns the last index reached before the tail cutoff.
  auto sweep = [&](int dir) -> std::size_t {
    std::size_t k = n;
    double u = m.alpha();
    const double h = dir * dz;
    const double target = dir > 0 ? m.alpha_plus() : m.alpha_minus();
    while (true) {
      const std::size_t next = dir > 0 ? k + 1 : k - 1;
      if (dir > 0 ? next >= w.z_grid.size() : k == 0) break;
      if (std::abs(target - u) <= kTailCutoff) break;
      const double k1 = slope(u);
      const double k2 = slope(u + 0.5 * h * k1);
      const double k3 = slope(u + 0.5 * h * k2);
      const double k4 = slope(u + h * k3);
      u += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      k = next;
      w.u0[k] = u;
    }
    return k;
  };
  const std::size_t right_cut = sweep(+1);
  const std::size_t left_cut = sweep(-1);
  for (std::size_t k = left_cut; k <= right_cut; ++k) w.u0_z[k] = slope(w.u0[k]);

  // Fit log U0z against z over the last decade of each computed side.
  auto fit_side = [&](std::size_t cut, int dir) {
    const double floor_val = w.u0_z[cut];
    std::vector<double> xs, ys;
    for (std::size_t k = cut;; k = dir > 0 ? k - 1 : k + 1) {
      if (w.u0_z[k] > 10.0 * floor_val || k == n) break;
      xs.push_back(std::abs(w.z_grid[k]));
      ys.push_back(std::log(w.u0_z[k]));
    }
    if (xs.size() < 3) throw NumericalError("compute_standing_wave: tail too short to fit");
    const double rate = -fit_line(xs, ys).slope;
    if (!(rate > 0.0)) throw NumericalError("compute_standing_wave: fitted tail rate <= 0");
    return rate;
  };
  w.lambda1_right = fit_side(right_cut, +1);
  w.lambda1_left = fit_side(left_cut, -1);
  w.lambda1 = std::min(w.lambda1_left, w.lambda1_right);
  w.lambda1_linearized = 1.0 / width;

  // Exponential extension past the cutoff.
  for (std::size_t k = right_cut + 1; k < w.z_grid.size(); ++k) {
    const double dzc = w.z_grid[k] - w.z_grid[right_cut];
    w.u0[k] = m.alpha_plus() - (m.alpha_plus() - w.u0[right_cut]) * std::exp(-w.lambda1_right * dzc);
    w.u0_z[k] = w.lambda1_right * (m.alpha_plus() - w.u0[k]);
  }
  for (std::size_t k = 0; k < left_cut; ++k) {
    const double dzc = w.z_grid[left_cut] - w.z_grid[k];
    w.u0[k] = m.alpha_minus() + (w.u0[left_cut] - m.alpha_minus()) * std::exp(-w.lambda1_left * dzc);
    w.u0_z[k] = w.lambda1_left * (w.u0[k] - m.alpha_minus());
  }

  for (std::size_t k = 0; k < w.z_grid.size(); ++k)
    w.tail_amplitude =
        std::max(w.tail_amplitude, std::abs(w.u0_z[k]) * std::exp(w.lambda1 * std::abs(w.z_grid[k])));
  return w;
}

double standing_wave_residual(const StandingWave& w, const BistableModel& m) {
  double worst = 0.0;
  const double inv = 1.0 / (w.dz * w.dz);
  for (std::size_t k = 1; k + 1 < w.u0.size(); ++k) {
    const double lap = (m.phi(w.u0[k + 1]) - 2.0 * m.phi(w.u0[k]) + m.phi(w.u0[k - 1])) * inv;
    worst = std::max(worst, std::abs(lap + m.f(w.u0[k])));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Transport coefficients

Lambda0 compute_lambda0(const BistableModel& m) {
  const auto wi = well_integrals(m);
  if (wi.sqrt_w.value < 1e-12) throw NumericalError("compute_lambda0: degenerate well");
  const double lam = wi.phi_sqrt_w.value / wi.sqrt_w.value;
  const double err_num = wi.phi_sqrt_w.error + wi.inner_error;
  const double err_den = wi.sqrt_w.error + wi.inner_error;
  return {lam, (err_num + std::abs(lam) * err_den) / wi.sqrt_w.value};
}

double compute_lambda0_profile(const StandingWave& w, const BistableModel& m) {
  std::vector<double> num(w.u0.size()), den(w.u0.size());
  for (std::size_t k = 0; k < w.u0.size(); ++k) {
    const double dphi = m.phi_prime(w.u0[k]);
    num[k] = dphi * w.u0_z[k] * dphi * w.u0_z[k];
    den[k] = dphi * w.u0_z[k] * w.u0_z[k];
  }
  return integrate_over_wave(w, num) / integrate_over_wave(w, den);
}

double compute_mobility(const BistableModel& m) {
  return compute_transport_coefficients(m).mobility;
}

double compute_surface_tension(const BistableModel& m) {
  return compute_transport_coefficients(m).surface_tension;
}

double TransportCoefficients::identity_residual() const noexcept {
  return std::abs(lambda0 - mobility * surface_tension);
}

TransportCoefficients compute_transport_coefficients(const BistableModel& m) {
  const auto wi = well_integrals(m);
  if (wi.sqrt_w.value < 1e-12) throw NumericalError("compute_transport_coefficients: degenerate well");
  TransportCoefficients tc;
  tc.phi_star = phi_star(m);
  const double root2 = std::sqrt(2.0);
  const double den = root2 * wi.sqrt_w.value;        // int sqrt(2W)
  const double num = root2 * wi.phi_sqrt_w.value;    // int phi' sqrt(2W)
  const double err_den = root2 * (wi.sqrt_w.error + wi.inner_error);
  const double err_num = root2 * (wi.phi_sqrt_w.error + wi.inner_error);
  tc.lambda0 = num / den;
  tc.mobility = tc.phi_star / den;
  tc.surface_tension = num / tc.phi_star;
  tc.err_lambda0 = (err_num + tc.lambda0 * err_den) / den;
  tc.err_mobility = tc.mobility * err_den / den;
  tc.err_surface_tension = err_num / tc.phi_star;
  return tc;
}

// ---------------------------------------------------------------------------
// Corrector

double Corrector::value(double z) const {
  if (z <= z_grid.front() || z >= z_grid.back()) return 0.0;
  const double dz = z_grid[1] - z_grid[0];
  const auto k = std::min(static_cast<std::size_t>((z - z_grid.front()) / dz), z_grid.size() - 2);
  return hermite(z_grid[k], dz, u1[k], u1[k + 1], u1_z[k], u1_z[k + 1], z);
}

double Corrector::derivative(double z) const {
  if (z <= z_grid.front() || z >= z_grid.back()) return 0.0;
  const double dz = z_grid[1] - z_grid[0];
  const auto k = std::min(static_cast<std::size_t>((z - z_grid.front()) / dz), z_grid.size() - 2);
  return hermite_slope(z_grid[k], dz, u1[k], u1[k + 1], u1_z[k], u1_z[k + 1], z);
}

Corrector compute_corrector(const StandingWave& w, const BistableModel& m, double lambda0,
                            double laplacian_d) {
  if (!std::isfinite(laplacian_d)) throw std::invalid_argument("compute_corrector: laplacian_d not finite");
  const std::size_t size = w.z_grid.size();
  const std::size_t c = w.center();
  const double inv = 1.0 / (w.dz * w.dz);

  std::vector<double> gprime(size), rhs(size), v0z(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double dphi = m.phi_prime(w.u0[k]);
    gprime[k] = m.f_prime(w.u0[k]) / dphi;
    v0z[k] = dphi * w.u0_z[k];
    rhs[k] = (lambda0 * w.u0_z[k] - v0z[k]) * laplacian_d;
  }

  Corrector out;
  out.z_grid = w.z_grid;
  out.v1.assign(size, 0.0);

  // Dirichlet problem on indices (first, last) exclusive, zero data at both ends.
  auto solve = [&](std::size_t first, std::size_t last) {
    const std::size_t n = last - first - 1;
    if (n == 0) return;
    std::vector<double> cp(n), dp(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = first + 1 + i;
      const double diag = -2.0 * inv + gprime[k];
      const double denom = i == 0 ? diag : diag - inv * cp[i - 1];
      if (std::abs(denom) < 1e-12 * inv) throw NumericalError("compute_corrector: discrete operator singular");
      cp[i] = inv / denom;
      dp[i] = (rhs[k] - (i == 0 ? 0.0 : inv * dp[i - 1])) / denom;
    }
    for (std::size_t i = n; i-- > 0;) {
      const std::size_t k = first + 1 + i;
      out.v1[k] = dp[i] - (i + 1 < n ? cp[i] * out.v1[k + 1] : 0.0);
    }
  };
  solve(c, size - 1);
  solve(0, c);

  const auto& v = out.v1;
  const double right = (-3 * v[c] + 4 * v[c + 1] - v[c + 2]) / (2 * w.dz);
  const double left = (3 * v[c] - 4 * v[c - 1] + v[c - 2]) / (2 * w.dz);
  out.derivative_jump = right - left;

  std::vector<double> solv(size);
  for (std::size_t k = 0; k < size; ++k)
    solv[k] = (lambda0 / m.phi_prime(w.u0[k]) - 1.0) * v0z[k] * v0z[k];
  out.solvability_residual = integrate_over_wave(w, solv);

  if (laplacian_d != 0.0 && std::abs(out.derivative_jump) > 1e-3 * std::abs(laplacian_d)) {
    std::ostringstream os;
    os << "compute_corrector: no bounded C1 solution (derivative jump " << out.derivative_jump
       << "); lambda0 inconsistent with the wave";
    throw NumericalError(os.str());
  }

  out.u1.resize(size);
  for (std::size_t k = 0; k < size; ++k) out.u1[k] = v[k] / m.phi_prime(w.u0[k]);
  out.u1_z.resize(size);
  for (std::size_t k = 1; k + 1 < size; ++k) out.u1_z[k] = (out.u1[k + 1] - out.u1[k - 1]) / (2 * w.dz);
  out.u1_z.front() = (out.u1[1] - out.u1[0]) / w.dz;
  out.u1_z.back() = (out.u1[size - 1] - out.u1[size - 2]) / w.dz;
  return out;
}

}  // namespace ndac
