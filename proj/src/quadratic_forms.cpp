#include "vkr/quadratic_forms.hpp"

#include <cmath>
#include <stdexcept>

namespace vkr {

std::string to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::H1: return "H1";
    case Hypothesis::H2: return "H2";
    case Hypothesis::None: return "none";
  }
  return "none";
}

bool is_spd(const Eigen::Matrix3d& C) {
  if (!C.allFinite()) return false;
  if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + C.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Eigen::Matrix3d> llt(C);
  return llt.info() == Eigen::Success;
}

QuadForm2 make_isotropic(double mu, double lambda) {
  // eigenvalues are 4mu, 2mu, 2mu + 2lambda
  if (!(mu > 0.0)) throw std::invalid_argument("isotropic form: mu must be positive");
  if (!(mu + lambda > 0.0)) throw std::invalid_argument("isotropic form: mu + lambda must be positive");
  QuadForm2 q;
  q.C << 2 * mu + lambda, 0, lambda,
         0, 4 * mu, 0,
         lambda, 0, 2 * mu + lambda;
  return q;
}

QuadForm2 make_matrix_form(const Eigen::Matrix3d& C) {
  if (!is_spd(C)) throw std::invalid_argument("quadratic form matrix is not symmetric positive definite");
  QuadForm2 q;
  q.C = 0.5 * (C + C.transpose());
  return q;
}

QuadForm1 reduce_to_1(const QuadForm2& q) {
  if (!is_spd(q.C)) throw std::invalid_argument("reduce_to_1: form is not positive definite");
  const double c22 = q.C(2, 2);
  QuadForm1 r;
  r.C = q.C.topLeftCorner<2, 2>() - q.C.topRightCorner<2, 1>() * q.C.bottomLeftCorner<1, 2>() / c22;
  r.C = 0.5 * (r.C + r.C.transpose()).eval();
  r.argmin_row = -q.C.bottomLeftCorner<1, 2>().transpose() / c22;
  return r;
}

QuadForm0 reduce_to_0(const QuadForm1& q) {
  if (!(q.C(1, 1) > 0.0) || !(q.C.determinant() > 0.0))
    throw std::invalid_argument("reduce_to_0: form is not positive definite");
  QuadForm0 r;
  r.C0 = q.C(0, 0) - q.C(0, 1) * q.C(1, 0) / q.C(1, 1);
  r.argmin_coeff = -q.C(1, 0) / q.C(1, 1);
  return r;
}

ExtendedForm extended_form(const QuadForm0& q0, const QuadForm1& q1) {
  if (!(q0.C0 > 0.0)) throw std::invalid_argument("extended_form: C0 must be positive");
  ExtendedForm e;
  e.Q.setZero();
  e.Q(0, 0) = q0.C0;
  e.Q.bottomRightCorner<2, 2>() = q1.C / 12.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(e.Q);
  const Eigen::Vector3d ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) throw std::invalid_argument("extended_form: form is not positive definite");
  const Eigen::Matrix3d& V = es.eigenvectors();
  e.sqrt = V * ev.cwiseSqrt().asDiagonal() * V.transpose();
  e.invsqrt = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  return e;
}

Eigen::Vector2d dQ1(const QuadForm1& q, double a, double b) { return 2.0 * (q.C * Eigen::Vector2d(a, b)); }

QuadForm2 MaterialPair::viscous_at(double eps) const {
  if (!vanishing_transverse) return R;
  QuadForm2 out;
  out.C.setZero();
  out.C.topLeftCorner<2, 2>() = R1().C;
  out.C(2, 2) = eps;
  return out;
}

Hypothesis classify_hypothesis(const MaterialPair& m) {
  const double tiny = 1e-14;
  const QuadForm1 w1 = m.W1();
  const QuadForm1 r1 = m.R1();
  const bool w_alpha_zero = w1.argmin_row.cwiseAbs().maxCoeff() <= tiny * m.W.C.cwiseAbs().maxCoeff();
  const bool w_z_zero = std::abs(reduce_to_0(w1).argmin_coeff) <= tiny;
  const bool r_z_zero = std::abs(reduce_to_0(r1).argmin_coeff) <= tiny;

  bool r_alpha_zero = true;
  for (double eps : {1.0, 1e-2, 1e-4}) {
    const QuadForm1 re = reduce_to_1(m.viscous_at(eps));
    if (re.argmin_row.cwiseAbs().maxCoeff() > tiny * m.R.C.cwiseAbs().maxCoeff()) r_alpha_zero = false;
  }
  if (w_alpha_zero && w_z_zero && r_alpha_zero && r_z_zero) return Hypothesis::H1;
  if (!(w_z_zero && r_z_zero)) return Hypothesis::None;

  // limit of the viscous family at sampled (q11, q12, alpha) must ignore alpha
  const double samples[][3] = {{1, 0, 0}, {0, 1, 0}, {1, 0.5, 2}, {-0.3, 0.7, -1.5}, {0, 0, 1}, {0.2, -0.4, 5}};
  double prev_gap = -1.0;
  for (double eps : {1e-6, 1e-9}) {
    const QuadForm2 re = m.viscous_at(eps);
    double gap = 0.0;
    for (const auto& s : samples)
      gap = std::max(gap, std::abs(re(SymVec{s[0], s[1], s[2]}) - r1(s[0], s[1])));
    if (prev_gap >= 0.0 && !(gap <= 1e-4 && gap < prev_gap)) return Hypothesis::None;
    prev_gap = gap;
  }
  return prev_gap <= 1e-6 ? Hypothesis::H2 : Hypothesis::None;
}

}  // namespace vkr
