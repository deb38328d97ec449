#pragma once

#include <vector>

namespace vkr {

// Polynomial in ascending powers: c[0] + c[1] x + ...
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  double operator()(double x, int deriv = 0) const;
  bool is_zero() const;
  const std::vector<double>& coeffs() const { return c_; }

 private:
  std::vector<double> c_;
};

// Lateral data: y1 = u1 on the ends, y2 = u2 (with slope u2'), w = v (with slope v').
struct BoundaryData {
  Polynomial u1;
  Polynomial u2;
  Polynomial v;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& p);
Polynomial operator*(const Polynomial& a, const Polynomial& b);

}  // namespace vkr
