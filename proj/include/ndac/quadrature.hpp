#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace ndac {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< a-posteriori estimate from the Gauss-Kronrod pair
};

/// Raised when the requested absolute accuracy was not reached.
class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Adaptive 15-point Gauss-Kronrod quadrature with interval bisection.
/// Throws QuadratureError if the error estimate exceeds `abs_tol`.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-10);

}  // namespace ndac
