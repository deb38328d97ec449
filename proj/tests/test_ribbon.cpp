#include "doctest.h"
#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace vkr;
using namespace vkr::testing;

namespace {

RibbonModel make_model(int n, const BoundaryData& bc = {}, const RibbonForces& f = {}, RibbonSpaces sp = {},
                       MaterialPair m = h1_material()) {
  return RibbonModel(Mesh1D(1.0, n), m, bc, f, sp);
}

MaterialPair coupled_material() {
  Eigen::Matrix3d C;
  C << 3.0, 0.4, 0.5, 0.4, 2.5, 0.2, 0.5, 0.2, 2.0;
  return {make_matrix_form(C), make_isotropic(1.0, 0.5), false};
}

}  // namespace

TEST_CASE("ribbon energy on analytic states") {
  const RibbonModel zero = make_model(8);
  CHECK(zero.energy(Vec::Zero(zero.size())) == 0.0);

  BoundaryData bc;
  bc.u1 = Polynomial({0.0, 1.0});
  for (RibbonSpaces sp : {RibbonSpaces{}, RibbonSpaces{Kind1D::P1, Kind1D::Hermite3, Kind1D::Hermite3, Kind1D::P1}}) {
    const RibbonModel m = make_model(8, bc, {}, sp);
    RibbonInitial init;
    init.xi1 = Polynomial({0.0, 1.0});
    CHECK(m.energy(m.interpolate(init)) == doctest::Approx(1.0).epsilon(1e-13));
  }

  BoundaryData bc2;
  bc2.u2 = Polynomial({0.0, 0.0, 0.5});
  const RibbonModel m2 = make_model(6, bc2);
  RibbonInitial i2;
  i2.xi2 = Polynomial({0.0, 0.0, 0.5});
  const Vec u2 = m2.interpolate(i2);
  CHECK(m2.energy(u2) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));

  // metric: states differing by xi2'' = 1
  const RibbonModel free = make_model(6);
  Vec ua = Vec::Zero(free.size());
  Vec ub = ua;
  const Vec bump = interpolate_1d(free.mesh(), Kind1D::Hermite3, [](double x, int d) { return d == 0 ? 0.5 * x * x : x; });
  ub.segment(free.offset(RibbonField::Xi2), free.field_size(RibbonField::Xi2)) = bump;
  CHECK(free.sqdist(ua, ub) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(free.sqdist(ub, ua) == free.sqdist(ua, ub));
  CHECK(free.sqdist(ub, ub) == 0.0);
}

TEST_CASE("energy and metric agree with the extended-form representation") {
  std::mt19937 rng(7);
  BoundaryData bc{Polynomial({0.1, 0.2}), Polynomial({0.0, 0.1, 0.3}), Polynomial({0.05, 0.0, -0.2})};
  RibbonForces f{Polynomial({0.3, 1.0}), Polynomial({-0.2}), Polynomial({0.0, 0.4})};
  const RibbonModel m = make_model(10, bc, f, {}, coupled_material());
  Vec base = Vec::Zero(m.size());
  m.apply_dirichlet(base);
  for (int k = 0; k < 10; ++k) {
    const Vec a = random_state(m, base, 0.5, rng), b = random_state(m, base, 0.5, rng);
    CHECK(m.energy(a) == doctest::Approx(m.energy_extended(a)).epsilon(1e-12));
    CHECK(m.sqdist(a, b) == doctest::Approx(m.sqdist_extended(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("metric is symmetric and satisfies the triangle inequality") {
  std::mt19937 rng(8);
  const RibbonModel m = make_model(12, {}, {}, {}, coupled_material());
  const Vec z = Vec::Zero(m.size());
  for (int k = 0; k < 30; ++k) {
    const Vec a = random_state(m, z, 1.0, rng), b = random_state(m, z, 1.0, rng), c = random_state(m, z, 1.0, rng);
    CHECK(m.metric(a, b) == doctest::Approx(m.metric(b, a)).epsilon(1e-13));
    CHECK(m.metric(a, c) <= m.metric(a, b) + m.metric(b, c) + 1e-12);
    CHECK(m.metric(a, a) == 0.0);
  }
}

TEST_CASE("G/H expansion identity") {
  std::mt19937 rng(9);
  const RibbonModel m = make_model(7, {}, {}, {}, coupled_material());
  const Vec z = Vec::Zero(m.size());
  const Vec u = random_state(m, z, 1.0, rng), ut = random_state(m, z, 1.0, rng);
  const auto gu = m.channels(u), gt = m.channels(ut);
  const Vec d = u - ut;
  int dofs[detail::kMaxLocal];
  detail::PointStrain ps;
  std::size_t idx = 0;
  double worst = 0.0;
  for (int e = 0; e < m.element_count(); ++e) {
    m.element_dofs(e, dofs);
    detail::LocalVec ul(m.local_size()), dl(m.local_size());
    for (int a = 0; a < m.local_size(); ++a) {
      ul[a] = u[dofs[a]];
      dl[a] = d[dofs[a]];
    }
    for (int q = 0; q < m.quad_count(); ++q, ++idx) {
      m.point_strain(e, q, ul, true, ps);
      const detail::StrainVec H = ps.J * dl;
      const double x = m.quad_points()[idx];
      const double dw = m.eval(u, RibbonField::W, 1, x) - m.eval(ut, RibbonField::W, 1, x);
      Eigen::Vector4d rhs(H[0] - 0.5 * dw * dw, H[1], H[2], H[3]);
      worst = std::max(worst, (gu[idx] - gt[idx] - rhs).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst < 1e-11);
}

TEST_CASE("ribbon gradients match finite differences") {
  std::mt19937 rng(10);
  BoundaryData bc{Polynomial({0.1}), Polynomial({0.0, 0.1}), Polynomial({0.0, 0.0, 0.2})};
  RibbonForces f{Polynomial({1.0}), Polynomial({0.5}), Polynomial({-0.3})};
  const RibbonModel m = make_model(6, bc, f, {}, coupled_material());
  Vec base = Vec::Zero(m.size());
  m.apply_dirichlet(base);
  for (int k = 0; k < 5; ++k) {
    const Vec v = random_state(m, base, 0.5, rng), a = random_state(m, base, 0.5, rng);
    CHECK(fd_relative_error(m, [&](const Vec& x) { return m.energy(x); }, v, m.energy_gradient(v)) < 1e-6);
    CHECK(fd_relative_error(m, [&](const Vec& x) { return 0.5 * m.sqdist(a, x); }, v, m.halfsq_gradient(a, v)) < 1e-6);
  }
  const Vec v = random_state(m, base, 0.5, rng);
  CHECK(m.halfsq_gradient(v, v).norm() == 0.0);
}

TEST_CASE("Hessian matches the gradient's directional derivative") {
  std::mt19937 rng(12);
  const RibbonModel m = make_model(5, {}, {}, {}, coupled_material());
  const Vec z = Vec::Zero(m.size());
  const Vec v = random_state(m, z, 0.5, rng), a = random_state(m, z, 0.5, rng), dir = random_state(m, z, 1.0, rng);
  Objective o;
  o.c_energy = 1.0;
  o.c_dist = 3.0;
  o.anchor = &a;
  o.want_hess = true;
  const SpMat H = m.evaluate(v, o).hess;
  auto grad = [&](const Vec& x) {
    Objective g = o;
    g.want_hess = false;
    g.want_grad = true;
    return m.evaluate(x, g).grad;
  };
  const double h = 1e-6;
  const Vec fd = (grad(v + h * dir) - grad(v - h * dir)) / (2 * h);
  CHECK((fd - H * dir).norm() < 1e-6 * fd.norm());
}

TEST_CASE("local slope: zero state, dense oracle, representation, orthogonality") {
  const RibbonModel m = make_model(8);
  const SlopeSolution s0 = m.local_slope(Vec::Zero(m.size()));
  CHECK(s0.slope == 0.0);

  // pure xi2 state, zero BC: slope^2 = c_W^2 / c_R xi^T K xi with K the dense bending matrix
  const RibbonModel mx = make_model(8, {}, {}, {}, h1_material(1.0, 2.0));
  Vec u = Vec::Zero(mx.size());
  const Vec bump = interpolate_1d(mx.mesh(), Kind1D::Hermite3, [](double x, int d) {
    const double p = x * x - 0.25;
    return d == 0 ? p * p : 4 * x * p;
  });
  u.segment(mx.offset(RibbonField::Xi2), bump.size()) = bump;
  const SpMat K = assemble_quadratic(mx.mesh(), Kind1D::Hermite3, Kind1D::Hermite3,
                                     [](double, const auto& a, const auto& b) { return a[2] * b[2] / 12.0; }, gauss_rule(5));
  const double cW = 2.0, cR = 4.0;  // C0 for mu = 1 and mu = 2
  Eigen::MatrixXd Kd = K.toDense();
  const Vec g = cW * Kd * bump;
  // restrict to interior xi2 DOFs (ends: value and slope fixed)
  const int nd = static_cast<int>(bump.size());
  const Eigen::MatrixXd Ki = Kd.block(2, 2, nd - 4, nd - 4);
  const Vec gi = g.segment(2, nd - 4);
  const double oracle = gi.dot((cR * Ki).ldlt().solve(gi));
  const SlopeSolution s = mx.local_slope(u);
  CHECK(s.slope * s.slope == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(s.slope * s.slope == doctest::Approx(cW * cW / cR * bump.dot(Kd * bump)).epsilon(1e-10));
  CHECK(std::abs(s.representation - s.slope) <= 1e-10 * s.slope);
  // proportional forms on a linear state: the viscous stress balances the elastic one pointwise
  CHECK(s.L_norm <= 1e-12 * s.stress_norm);
}

TEST_CASE("local slope on random nonlinear states") {
  std::mt19937 rng(13);
  RibbonForces f{Polynomial({1.0, -0.5}), Polynomial({0.2}), Polynomial({0.1})};
  BoundaryData bc{Polynomial({0.0, 0.1}), Polynomial({0.0}), Polynomial({0.02})};
  const RibbonModel m = make_model(10, bc, f, {}, coupled_material());
  Vec base = Vec::Zero(m.size());
  m.apply_dirichlet(base);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) {
    const Vec u = random_state(m, base, 0.3, rng);
    const SlopeSolution s = m.local_slope(u);
    CHECK(std::abs(s.representation - s.slope) <= 1e-10 * s.slope);
    CHECK(s.orthogonality <= 1e-8 * s.L_norm);
    // difference quotients never exceed the slope (up to higher-order terms)
    const double phi = m.energy(u);
    double worst = 0.0;
    for (int j = 0; j < 200; ++j) {
      Vec d = Vec::Zero(m.size());
      for (int i = 0; i < d.size(); ++i)
        if (!m.constrained()[i]) d[i] = nd(rng);
      const Vec v = u + 1e-6 * d / d.norm();
      const double q = std::max(0.0, phi - m.energy(v)) / m.metric(u, v);
      worst = std::max(worst, q);
    }
    CHECK(worst <= s.slope * (1.0 + 1e-4) + 1e-8);
  }
}

TEST_CASE("weak residual equals the incremental gradient") {
  std::mt19937 rng(14);
  RibbonForces f{Polynomial({1.0, -0.5}), Polynomial({0.2}), Polynomial({0.1, 0.3})};
  BoundaryData bc{Polynomial({0.0, 0.1}), Polynomial({0.0, 0.05}), Polynomial({0.02})};
  for (RibbonSpaces sp : {RibbonSpaces{}, RibbonSpaces{Kind1D::P1, Kind1D::Hermite3, Kind1D::Hermite3, Kind1D::P1}}) {
    const RibbonModel m = make_model(9, bc, f, sp, coupled_material());
    Vec base = Vec::Zero(m.size());
    m.apply_dirichlet(base);
    const Vec prev = random_state(m, base, 0.3, rng), next = random_state(m, base, 0.3, rng);
    const Vec r = m.weak_residual_vector(prev, next, 0.05);
    const Vec g = m.incremental_gradient(prev, next, 0.05);
    CHECK((r - g).norm() <= 1e-12 * g.norm());
  }
  const RibbonModel m = make_model(9);
  const Vec z = Vec::Zero(m.size());
  CHECK(m.weak_residual(z, z, 0.1) == 0.0);
  Vec p = z;
  p[m.offset(RibbonField::W) + 6] = 1e-3;
  CHECK(m.weak_residual(z, p, 0.1) > 0.0);
  CHECK_THROWS(m.weak_residual(z, z, 0.0));
}

TEST_CASE("mutual shift preserves differences") {
  std::mt19937 rng(15);
  const RibbonModel m = make_model(8, {}, {}, {}, coupled_material());
  const Vec zero = Vec::Zero(m.size());
  const Vec z = random_state(m, zero, 0.4, rng), u = random_state(m, zero, 0.4, rng);
  CHECK(mutual_shift(z, z, u) == u);

  // identical w components: identical strain differences
  Vec zk = random_state(m, zero, 0.4, rng);
  zk.segment(m.offset(RibbonField::W), m.field_size(RibbonField::W)) = z.segment(m.offset(RibbonField::W), m.field_size(RibbonField::W));
  const Vec uk = mutual_shift(zk, z, u);
  CHECK(m.sqdist(zk, uk) == doctest::Approx(m.sqdist(z, u)).epsilon(1e-12));

  const Vec pert = random_state(m, zero, 1.0, rng);
  double prev_d = 1e300, prev_e = 1e300, first_d = -1.0;
  for (int k : {1, 10, 100, 1000}) {
    const Vec zk2 = z + pert / k;
    const Vec uk2 = mutual_shift(zk2, z, u);
    const double dd = std::abs(m.metric(zk2, uk2) - m.metric(z, u));
    const double de = std::abs((m.energy(zk2) - m.energy(uk2)) - (m.energy(z) - m.energy(u)));
    CHECK(dd < prev_d);
    CHECK(de < prev_e);
    if (first_d < 0) first_d = dd;
    prev_d = dd;
    prev_e = de;
  }
  CHECK(prev_d < 1e-2 * first_d);
}

TEST_CASE("lower bound of the metric on w and theta differences") {
  std::mt19937 rng(16);
  const RibbonModel m = make_model(16, {}, {}, {}, coupled_material());
  const Vec zero = Vec::Zero(m.size());
  const SpMat Kw = assemble_quadratic(m.mesh(), Kind1D::Hermite3, Kind1D::Hermite3,
                                      [](double, const auto& a, const auto& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; },
                                      gauss_rule(5));
  const SpMat Kt = assemble_quadratic(m.mesh(), Kind1D::Hermite3, Kind1D::Hermite3,
                                      [](double, const auto& a, const auto& b) { return a[0] * b[0] + a[1] * b[1]; }, gauss_rule(5));
  double C = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Vec a = random_state(m, zero, 0.5, rng), b = random_state(m, zero, 0.5, rng);
    const Vec dw = m.field(a, RibbonField::W) - m.field(b, RibbonField::W);
    const Vec dt = m.field(a, RibbonField::Theta) - m.field(b, RibbonField::Theta);
    const double lhs = std::sqrt(dw.dot(Kw * dw)) + std::sqrt(dt.dot(Kt * dt));
    C = std::max(C, lhs / m.metric(a, b));
  }
  MESSAGE("calibrated lower-bound constant: " << C);
  CHECK(std::isfinite(C));
}
