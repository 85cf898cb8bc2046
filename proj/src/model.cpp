#include "ndac/model.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "ndac/quadrature.hpp"

namespace ndac {

namespace {

constexpr int kScanPoints = 4001;

template <class Fn>
double scan_extreme(double lo, double hi, Fn&& fn, bool want_max) {
  double best = want_max ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScanPoints; ++i) {
    const double u = lo + (hi - lo) * i / (kScanPoints - 1);
    const double v = fn(u);
    best = want_max ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

}  // namespace

BistableModel::BistableModel(std::string name, Polynomial phi, Polynomial f, double alpha_minus,
                             double alpha, double alpha_plus)
    : name_(std::move(name)),
      phi_(std::move(phi)),
      f_(std::move(f)),
      alpha_minus_(alpha_minus),
      alpha_(alpha),
      alpha_plus_(alpha_plus) {
  dphi_ = phi_.derivative();
  d2phi_ = dphi_.derivative();
  d3phi_ = d2phi_.derivative();
  df_ = f_.derivative();
  d2f_ = df_.derivative();
  const Polynomial prim = (f_ * dphi_).antiderivative();
  w_ = Polynomial{prim(alpha_minus_)} + (-1.0) * prim;
  c_phi_ = scan_extreme(working_lo(), working_hi(), dphi_, false);
  mu_ = df_(alpha_);
}

double BistableModel::max_phi_prime(double lo, double hi) const {
  return scan_extreme(lo, hi, dphi_, true);
}

double BistableModel::max_abs_f_prime(double lo, double hi) const {
  return scan_extreme(lo, hi, [this](double u) { return std::abs(df_(u)); }, true);
}

double BistableModel::min_f_prime(double lo, double hi) const {
  return scan_extreme(lo, hi, df_, false);
}

bool ValidationReport::accepted() const noexcept {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " residual=" << c.residual;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << '\n';
  }
  return os.str();
}

ValidationReport validate_model(const BistableModel& m, double tol) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, double residual, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, residual, std::move(detail)});
  };

  const double lo = m.working_lo();
  const double hi = m.working_hi();

  // Finite values everywhere on the working interval.
  {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < kScanPoints && ok; ++i) {
      const double u = lo + (hi - lo) * i / (kScanPoints - 1);
      const double vals[] = {m.phi(u), m.phi_prime(u), m.f(u), m.f_prime(u)};
      for (double v : vals) {
        if (!std::isfinite(v)) {
          ok = false;
          std::ostringstream os;
          os << "non-finite value at u=" << u;
          detail = os.str();
          break;
        }
      }
    }
    add("finite", ok, ok ? 0.0 : std::numeric_limits<double>::quiet_NaN(), detail);
    if (!ok) return report;
  }

  const bool ordered = m.alpha_minus() < m.alpha() && m.alpha() < m.alpha_plus();
  add("ordering", ordered, 0.0, ordered ? "" : "need alpha_- < alpha < alpha_+");

  const double zero_res =
      std::max({std::abs(m.f(m.alpha_minus())), std::abs(m.f(m.alpha())), std::abs(m.f(m.alpha_plus()))});
  add("zeros", zero_res <= tol, zero_res);

  {
    const double sm = m.f_prime(m.alpha_minus());
    const double s0 = m.f_prime(m.alpha());
    const double sp = m.f_prime(m.alpha_plus());
    const bool ok = sm < 0.0 && sp < 0.0 && s0 > 0.0;
    std::ostringstream os;
    os << "f'(a-)=" << sm << " f'(a)=" << s0 << " f'(a+)=" << sp;
    add("slopes", ok, std::max({sm, -s0, sp}), os.str());
  }

  // Exactly three zeros: f > 0 left of alpha_-, f < 0 on (alpha_-, alpha),
  // f > 0 on (alpha, alpha_+), f < 0 right of alpha_+. Samples where |f| <= tol
  // are near a zero and do not count.
  {
    bool ok = true;
    std::string detail;
    for (int i = 0; i < kScanPoints; ++i) {
      const double u = lo + (hi - lo) * i / (kScanPoints - 1);
      const double v = m.f(u);
      if (std::abs(v) <= tol) continue;
      const double want = u < m.alpha_minus() ? 1.0 : u < m.alpha() ? -1.0 : u < m.alpha_plus() ? 1.0 : -1.0;
      if (v * want < 0.0) {
        ok = false;
        std::ostringstream os;
        os << "unexpected sign of f at u=" << u;
        detail = os.str();
        break;
      }
    }
    add("sign_pattern", ok, 0.0, detail);
  }

  {
    double min_dphi = std::numeric_limits<double>::infinity();
    double where = lo;
    for (int i = 0; i < kScanPoints; ++i) {
      const double u = lo + (hi - lo) * i / (kScanPoints - 1);
      if (m.phi_prime(u) < min_dphi) {
        min_dphi = m.phi_prime(u);
        where = u;
      }
    }
    std::ostringstream os;
    os << "min phi' at u=" << where;
    add("phi_prime_positive", min_dphi > 0.0, min_dphi, os.str());
  }

  if (ordered) {
    const auto area = integrate([&](double s) { return m.phi_prime(s) * m.f(s); }, m.alpha_minus(),
                                m.alpha_plus(), 1e-12);
    add("equal_area", std::abs(area.value) <= tol, std::abs(area.value));
  }
  return report;
}

void require_valid(const BistableModel& candidate, double tol) {
  const auto report = validate_model(candidate, tol);
  if (!report.accepted())
    throw ModelError("model '" + candidate.name() + "' rejected:\n" + report.summary());
}

double potential(const BistableModel& m, double u) {
  if (!(u >= m.working_lo() && u <= m.working_hi()))
    throw std::domain_error("potential: u outside the working interval");
  if (u == m.alpha_minus() || u == m.alpha_plus()) return 0.0;
  auto integrand = [&](double s) { return m.f(s) * m.phi_prime(s); };
  if (u <= m.alpha()) return -integrate(integrand, m.alpha_minus(), u, 1e-10).value;
  return integrate(integrand, u, m.alpha_plus(), 1e-10).value;
}

PotentialSample sample_potential(const BistableModel& m, int n) {
  if (n < 2) throw std::invalid_argument("sample_potential: need n >= 2");
  PotentialSample s;
  s.u_grid.resize(n);
  s.w_values.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u =
        i == n - 1 ? m.alpha_plus() : m.alpha_minus() + m.jump() * static_cast<double>(i) / (n - 1);
    s.u_grid[i] = u;
    s.w_values[i] = potential(m, u);
  }
  return s;
}

ReactionFlow reaction_flow_Y(const BistableModel& m, double tau, double zeta) {
  if (!(tau >= 0.0)) throw std::invalid_argument("reaction_flow_Y: tau must be >= 0");
  if (!std::isfinite(zeta)) throw std::invalid_argument("reaction_flow_Y: zeta must be finite");
  if (tau == 0.0) return {zeta, 1.0};

  using State = std::array<double, 2>;  // Y, log Y_zeta
  namespace ode = boost::numeric::odeint;
  const double bound =
      std::max({std::abs(zeta), std::abs(m.working_lo()), std::abs(m.working_hi())}) + 1e-9;

  auto rhs = [&](const State& x, State& dxdt, double) {
    dxdt[0] = m.f(x[0]);
    dxdt[1] = m.f_prime(x[0]);
  };
  auto guard = [&](const State& x, double t) {
    if (!std::isfinite(x[0]) || std::abs(x[0]) > bound) {
      std::ostringstream os;
      os << "reaction_flow_Y: trajectory left the working interval at tau=" << t
         << " (Y=" << x[0] << ")";
      throw ModelError(os.str());
    }
  };
  State x{zeta, 0.0};
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  const double dt0 = std::min(1e-3, tau) / (1.0 + std::abs(m.f_prime(zeta)));
  ode::integrate_adaptive(stepper, rhs, x, 0.0, tau, dt0, guard);
  return {x[0], std::exp(x[1])};
}

// ---------------------------------------------------------------------------

namespace {

double param(const ModelParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1) throw ModelError("parameter '" + key + "' must be a scalar");
  return it->second.front();
}

}  // namespace

BistableModel make_model(const std::string& name, const ModelParams& params) {
  const Polynomial cubic{0.0, 1.0, 0.0, -1.0};  // u - u^3
  if (name == "linear-cubic") {
    const double c = param(params, "scale", 1.0);
    return BistableModel(name, Polynomial{0.0, c}, cubic, -1.0, 0.0, 1.0);
  }
  if (name == "cubic-flux") {
    return BistableModel(name, Polynomial{0.0, 1.0, 0.0, 1.0 / 3.0}, cubic, -1.0, 0.0, 1.0);
  }
  if (name == "skewed-flux") {
    // phi = u + u^2/8, f = (1 - u^2)(u - 1/20); the shifted middle zero balances the areas.
    return BistableModel(name, Polynomial{0.0, 1.0, 0.125},
                         Polynomial{-0.05, 1.0, 0.05, -1.0}, -1.0, 0.05, 1.0);
  }
  if (name == "polynomial") {
    auto phi = params.find("phi");
    auto f = params.find("f");
    auto alphas = params.find("alphas");
    if (phi == params.end() || f == params.end() || alphas == params.end())
      throw ModelError("polynomial model needs 'phi', 'f' and 'alphas'");
    if (alphas->second.size() != 3) throw ModelError("'alphas' must hold three values");
    return BistableModel(name, Polynomial(phi->second), Polynomial(f->second), alphas->second[0],
                         alphas->second[1], alphas->second[2]);
  }
  throw ModelError("unknown model '" + name + "'");
}

std::vector<BistableModel> registry_models() {
  return {make_model("linear-cubic"), make_model("cubic-flux"), make_model("skewed-flux")};
}

}  // namespace ndac
