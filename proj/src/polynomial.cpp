#include "ndac/polynomial.hpp"

#include <algorithm>
#include <sstream>

namespace ndac {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  trim();
}

Polynomial::Polynomial(std::initializer_list<double> coeffs)
    : Polynomial(std::vector<double>(coeffs)) {}

double Polynomial::operator()(double u) const noexcept {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * u + *it;
  return acc;
}

void Polynomial::evaluate(const double* x, double* y, std::size_t n) const noexcept {
  const std::size_t d = coeffs_.size();
  if (d == 0) {
    for (std::size_t k = 0; k < n; ++k) y[k] = 0.0;
    return;
  }
  const double top = coeffs_[d - 1];
  for (std::size_t k = 0; k < n; ++k) y[k] = top;
  for (std::size_t c = d - 1; c-- > 0;) {
    const double a = coeffs_[c];
    for (std::size_t k = 0; k < n; ++k) y[k] = y[k] * x[k] + a;
  }
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial{0.0};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> a(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) a[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  return Polynomial(std::move(a));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return Polynomial(std::move(c));
}

Polynomial operator*(double s, const Polynomial& p) {
  std::vector<double> c = p.coeffs_;
  for (auto& x : c) x *= s;
  return Polynomial(std::move(c));
}

std::string Polynomial::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    if (k) os << ' ';
    os << coeffs_[k];
  }
  return os.str();
}

void Polynomial::trim() {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
}

}  // namespace ndac
