#include "vkr/polynomial.hpp"

#include <algorithm>

namespace vkr {

double Polynomial::operator()(double x, int deriv) const {
  double acc = 0.0;
  for (int k = static_cast<int>(c_.size()) - 1; k >= deriv; --k) {
    double f = 1.0;
    for (int j = 0; j < deriv; ++j) f *= k - j;
    acc = acc * x + f * c_[k];
  }
  return acc;
}

bool Polynomial::is_zero() const {
  for (double v : c_)
    if (v != 0.0) return false;
  return true;
}

}  // namespace vkr

namespace vkr {

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs().size(), b.coeffs().size()), 0.0);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) c[i] += a.coeffs()[i];
  for (std::size_t i = 0; i < b.coeffs().size(); ++i) c[i] += b.coeffs()[i];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.coeffs().empty() || b.coeffs().empty()) return Polynomial();
  std::vector<double> c(a.coeffs().size() + b.coeffs().size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs().size(); ++i)
    for (std::size_t j = 0; j < b.coeffs().size(); ++j) c[i + j] += a.coeffs()[i] * b.coeffs()[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(double s, const Polynomial& p) {
  std::vector<double> c = p.coeffs();
  for (double& x : c) x *= s;
  return Polynomial(std::move(c));
}

}  // namespace vkr
