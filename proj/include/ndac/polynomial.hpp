#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace ndac {

/// Dense real polynomial, coefficients in increasing degree (c[0] + c[1] u + ...).
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  Polynomial(std::initializer_list<double> coeffs);

  double operator()(double u) const noexcept;

  Polynomial derivative() const;
  /// Antiderivative with zero constant term.
  Polynomial antiderivative() const;

  /// y[k] = p(x[k]) for k < n, Horner's rule vectorised across points.
  void evaluate(const double* x, double* y, std::size_t n) const noexcept;

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, const Polynomial& p);

  std::string to_string() const;

private:
  void trim();
  std::vector<double> coeffs_{0.0};
};

}  // namespace ndac
