#pragma once

#include <Eigen/Dense>

#include <string>

namespace vkr {

// Symmetric 2x2 strain stored as (q11, q12, q22).
struct SymVec {
  double q11 = 0.0;
  double q12 = 0.0;
  double q22 = 0.0;

  Eigen::Vector3d vec() const { return {q11, q12, q22}; }
};

struct QuadForm2 {
  Eigen::Matrix3d C = Eigen::Matrix3d::Identity();

  double operator()(const SymVec& q) const { return q.vec().dot(C * q.vec()); }
  double operator()(const Eigen::Vector3d& q) const { return q.dot(C * q); }
};

// Form on (q11, q12) after eliminating q22; alpha* = argmin_row . (q11, q12).
struct QuadForm1 {
  Eigen::Matrix2d C = Eigen::Matrix2d::Identity();
  Eigen::Vector2d argmin_row = Eigen::Vector2d::Zero();

  double operator()(double a, double b) const {
    Eigen::Vector2d v(a, b);
    return v.dot(C * v);
  }
  double argmin(double a, double b) const { return argmin_row(0) * a + argmin_row(1) * b; }
};

struct QuadForm0 {
  double C0 = 1.0;
  double argmin_coeff = 0.0;  // z*(q11) = argmin_coeff * q11

  double operator()(double a) const { return C0 * a * a; }
  double argmin(double a) const { return argmin_coeff * a; }
};

struct ExtendedForm {
  Eigen::Matrix3d Q = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d sqrt = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d invsqrt = Eigen::Matrix3d::Identity();
};

enum class Hypothesis { H1, H2, None };

std::string to_string(Hypothesis h);

QuadForm2 make_isotropic(double mu, double lambda);
// Throws unless C is symmetric positive definite.
QuadForm2 make_matrix_form(const Eigen::Matrix3d& C);
bool is_spd(const Eigen::Matrix3d& C);

QuadForm1 reduce_to_1(const QuadForm2& q);
QuadForm0 reduce_to_0(const QuadForm1& q);
ExtendedForm extended_form(const QuadForm0& q0, const QuadForm1& q1);
Eigen::Vector2d dQ1(const QuadForm1& q, double a, double b);

// Elastic form W and viscous form R. With vanishing_transverse set, the viscous
// form used at width eps is Q1_R(q11, q12) + eps * q22^2.
struct MaterialPair {
  QuadForm2 W;
  QuadForm2 R;
  bool vanishing_transverse = false;

  QuadForm2 viscous_at(double eps) const;
  QuadForm1 W1() const { return reduce_to_1(W); }
  QuadForm1 R1() const { return reduce_to_1(R); }
  QuadForm0 W0() const { return reduce_to_0(W1()); }
  QuadForm0 R0() const { return reduce_to_0(R1()); }
  ExtendedForm Wbar() const { return extended_form(W0(), W1()); }
  ExtendedForm Rbar() const { return extended_form(R0(), R1()); }
};

Hypothesis classify_hypothesis(const MaterialPair& m);

}  // namespace vkr
