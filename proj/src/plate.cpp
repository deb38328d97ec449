#include "vkr/plate.hpp"

#include <cmath>
#include <stdexcept>

namespace vkr {

PlateModel::PlateModel(const Mesh2D& mesh, const MaterialPair& material, const BoundaryData& bc,
                       const RibbonForces& forces, double eps, int quad_order)
    : mesh_(mesh), material_(material), bc_(bc), forces_(forces), eps_(eps), rule_(gauss_rule(quad_order)) {
  if (!(eps > 0.0)) throw std::invalid_argument("plate: eps must be positive");
  const int nx = mesh_.nx(), ny = mesh_.ny;
  spaces_[0] = {Kind1D::P2, Kind1D::P1, nx, ny};
  spaces_[1] = {Kind1D::Hermite3, Kind1D::P2, nx, ny};
  spaces_[2] = {Kind1D::Hermite3, Kind1D::Hermite3, nx, ny};
  for (int f = 0; f < 3; ++f) {
    offset_[f + 1] = offset_[f] + spaces_[f].size();
    loff_[f + 1] = loff_[f] + spaces_[f].local_size();
  }
  nloc_ = loff_[3];

  const QuadForm2 rw = material_.W, rr = material_.viscous_at(eps_);
  KW_ = detail::StrainMat::Zero(6, 6);
  KR_ = detail::StrainMat::Zero(6, 6);
  KW_.topLeftCorner(3, 3) = rw.C;
  KW_.bottomRightCorner(3, 3) = rw.C / 12.0;
  KR_.topLeftCorner(3, 3) = rr.C;
  KR_.bottomRightCorner(3, 3) = rr.C / 12.0;

  const std::size_t nq = rule_.t.size();
  shapes_.resize(nq * nq);
  for (std::size_t i = 0; i < nq; ++i)
    for (std::size_t j = 0; j < nq; ++j)
      for (int f = 0; f < 3; ++f) shape_2d(spaces_[f], rule_.t[i], rule_.t[j], mesh_.x.h(), mesh_.hy(), shapes_[i * nq + j][f]);

  constrained_.assign(size(), 0);
  bvals_ = Vec::Zero(size());
  const Function2D traces[3] = {
      [this](double x1, double x2, int, int) { return bc_.u1(x1) - x2 * bc_.u2(x1, 1); },
      [this](double x1, double, int, int) { return bc_.u2(x1); },
      [this](double x1, double, int d1, int d2) { return d2 > 0 ? 0.0 : bc_.v(x1, d1); },
  };
  for (int f = 0; f < 3; ++f) {
    const Vec vals = interpolate_2d(mesh_, spaces_[f], traces[f]);
    for (int i : lateral_dofs(spaces_[f], f == 2)) {
      constrained_[offset_[f] + i] = 1;
      bvals_[offset_[f] + i] = vals[i];
    }
  }

  load_ = Vec::Zero(size());
  const Polynomial* loads[3] = {&forces_.g1, &forces_.g2, &forces_.f};
  for (int e = 0; e < element_count(); ++e) {
    int dofs[detail::kMaxLocal];
    element_dofs(e, dofs);
    for (int q = 0; q < quad_count(); ++q) {
      const double x1 = quad_point(e, q)[0];
      const double wq = quad_weight(e, q);
      for (int f = 0; f < 3; ++f) {
        const double p = (*loads[f])(x1);
        if (p == 0.0) continue;
        for (int a = 0; a < spaces_[f].local_size(); ++a) load_[dofs[loff_[f] + a]] += wq * p * shapes_[q][f].d[0][0][a];
      }
    }
  }
  free_map_ = free_index_map(constrained_, &free_count_);
}

void PlateModel::element_dofs(int e, int* out) const {
  const int ex = e / mesh_.ny, ey = e % mesh_.ny;
  for (int f = 0; f < 3; ++f) {
    spaces_[f].element_dofs(ex, ey, out + loff_[f]);
    for (int a = 0; a < spaces_[f].local_size(); ++a) out[loff_[f] + a] += offset_[f];
  }
}

double PlateModel::quad_weight(int, int q) const {
  const std::size_t nq = rule_.t.size();
  return rule_.w[q / nq] * rule_.w[q % nq] * mesh_.x.h() * mesh_.hy();
}

Eigen::Vector2d PlateModel::quad_point(int e, int q) const {
  const int ex = e / mesh_.ny, ey = e % mesh_.ny;
  const std::size_t nq = rule_.t.size();
  return {mesh_.x.node(ex) + rule_.t[q / nq] * mesh_.x.h(), -0.5 + (ey + rule_.t[q % nq]) * mesh_.hy()};
}

void PlateModel::point_strain(int, int q, const detail::LocalVec& u, bool jac, detail::PointStrain& out) const {
  const auto& S1 = shapes_[q][0].d;
  const auto& S2 = shapes_[q][1].d;
  const auto& Sw = shapes_[q][2].d;
  const int n1 = spaces_[0].local_size(), n2 = spaces_[1].local_size(), nw = spaces_[2].local_size();
  const int o1 = loff_[0], o2 = loff_[1], ow = loff_[2];
  const double ie = 1.0 / eps_;
  double d1y1 = 0, d2y1 = 0, d1y2 = 0, d2y2 = 0, a = 0, b = 0, k11 = 0, k12 = 0, k22 = 0;
  for (int i = 0; i < n1; ++i) {
    d1y1 += S1[1][0][i] * u[o1 + i];
    d2y1 += S1[0][1][i] * u[o1 + i];
  }
  for (int i = 0; i < n2; ++i) {
    d1y2 += S2[1][0][i] * u[o2 + i];
    d2y2 += S2[0][1][i] * u[o2 + i];
  }
  for (int i = 0; i < nw; ++i) {
    const double c = u[ow + i];
    a += Sw[1][0][i] * c;
    b += Sw[0][1][i] * c;
    k11 += Sw[2][0][i] * c;
    k12 += Sw[1][1][i] * c;
    k22 += Sw[0][2][i] * c;
  }
  b *= ie;
  out.s.resize(6);
  out.s << d1y1 + 0.5 * a * a, 0.5 * ie * (d1y2 + d2y1) + 0.5 * a * b, ie * ie * d2y2 + 0.5 * b * b, k11, ie * k12,
      ie * ie * k22;
  out.ncurv = 0;
  if (!jac) return;
  out.J = detail::StrainJac::Zero(6, nloc_);
  for (int i = 0; i < n1; ++i) {
    out.J(0, o1 + i) = S1[1][0][i];
    out.J(1, o1 + i) = 0.5 * ie * S1[0][1][i];
  }
  for (int i = 0; i < n2; ++i) {
    out.J(1, o2 + i) = 0.5 * ie * S2[1][0][i];
    out.J(2, o2 + i) = ie * ie * S2[0][1][i];
  }
  auto& A = out.curv[0].a;
  auto& B = out.curv[1].b;
  A = detail::LocalVec::Zero(nloc_);
  B = detail::LocalVec::Zero(nloc_);
  for (int i = 0; i < nw; ++i) {
    const double p1 = Sw[1][0][i], p2 = ie * Sw[0][1][i];
    A[ow + i] = p1;
    B[ow + i] = p2;
    out.J(0, ow + i) = a * p1;
    out.J(1, ow + i) = 0.5 * (b * p1 + a * p2);
    out.J(2, ow + i) = b * p2;
    out.J(3, ow + i) = Sw[2][0][i];
    out.J(4, ow + i) = ie * Sw[1][1][i];
    out.J(5, ow + i) = ie * ie * Sw[0][2][i];
  }
  out.curv[0].k = 0;
  out.curv[0].coeff = 0.5;
  out.curv[0].b = A;
  out.curv[1].k = 1;
  out.curv[1].coeff = 0.5;
  out.curv[1].a = A;
  out.curv[2].k = 2;
  out.curv[2].coeff = 0.5;
  out.curv[2].a = B;
  out.curv[2].b = B;
  out.ncurv = 3;
}

ObjectiveValue PlateModel::evaluate(const Vec& v, const Objective& obj) const {
  if (v.size() != size() || (obj.anchor && obj.anchor->size() != size()))
    throw std::invalid_argument("plate: state size mismatch");
  return detail::evaluate_strain_objective(*this, KW_, KR_, load_, v, obj, default_exec());
}

double PlateModel::eval(const Vec& u, PlateField f, int d1, int d2, double x1, double x2) const {
  return eval_2d(mesh_, space(f), field(u, f), d1, d2, x1, x2);
}

ScaledOps PlateModel::scaled_operators(const Vec& u, double x1, double x2) const {
  const double ie = 1.0 / eps_;
  ScaledOps s;
  s.E << eval(u, PlateField::Y1, 1, 0, x1, x2),
      0.5 * ie * (eval(u, PlateField::Y2, 1, 0, x1, x2) + eval(u, PlateField::Y1, 0, 1, x1, x2)),
      ie * ie * eval(u, PlateField::Y2, 0, 1, x1, x2);
  s.grad << eval(u, PlateField::W, 1, 0, x1, x2), ie * eval(u, PlateField::W, 0, 1, x1, x2);
  s.hess << eval(u, PlateField::W, 2, 0, x1, x2), ie * eval(u, PlateField::W, 1, 1, x1, x2),
      ie * ie * eval(u, PlateField::W, 0, 2, x1, x2);
  return s;
}

Vec PlateModel::interpolate(const Function2D& y1, const Function2D& y2, const Function2D& w) const {
  Vec u(size());
  u.segment(offset_[0], spaces_[0].size()) = interpolate_2d(mesh_, spaces_[0], y1);
  u.segment(offset_[1], spaces_[1].size()) = interpolate_2d(mesh_, spaces_[1], y2);
  u.segment(offset_[2], spaces_[2].size()) = interpolate_2d(mesh_, spaces_[2], w);
  static const char* names[3] = {"y1", "y2", "w"};
  for (int i = 0; i < size(); ++i) {
    if (!constrained_[i]) continue;
    if (std::abs(u[i] - bvals_[i]) > 1e-10 * (1.0 + std::abs(bvals_[i]))) {
      int f = 0;
      while (i >= offset_[f + 1]) ++f;
      throw std::invalid_argument(std::string("plate field ") + names[f] + " does not match the lateral boundary data");
    }
    u[i] = bvals_[i];
  }
  return u;
}

double PlateModel::trace_error(const Vec& u) const {
  double err = 0.0;
  for (int i = 0; i < size(); ++i)
    if (constrained_[i]) err = std::max(err, std::abs(u[i] - bvals_[i]));
  return err;
}

void PlateModel::apply_dirichlet(Vec& u) const {
  for (int i = 0; i < size(); ++i)
    if (constrained_[i]) u[i] = bvals_[i];
}

double PlateModel::theta_bar(const Vec& u, double x1, int deriv) const {
  return (eval(u, PlateField::W, deriv, 0, x1, 0.5) - eval(u, PlateField::W, deriv, 0, x1, -0.5)) / eps_;
}

double PlateModel::projected_sqdist(const Vec& plate_state, const RibbonModel& ribbon, const Vec& ribbon_state) const {
  const QuadForm1 r1 = material_.R1();
  const double c0 = reduce_to_0(r1).C0;
  const int nw = spaces_[2].local_size(), n1 = spaces_[0].local_size();
  double acc = 0.0;
  for (int e = 0; e < element_count(); ++e) {
    int dofs[detail::kMaxLocal];
    element_dofs(e, dofs);
    for (int q = 0; q < quad_count(); ++q) {
      const Eigen::Vector2d x = quad_point(e, q);
      const auto& S1 = shapes_[q][0].d;
      const auto& Sw = shapes_[q][2].d;
      double d1y1 = 0, a = 0, k11 = 0;
      for (int i = 0; i < n1; ++i) d1y1 += S1[1][0][i] * plate_state[dofs[loff_[0] + i]];
      for (int i = 0; i < nw; ++i) {
        a += Sw[1][0][i] * plate_state[dofs[loff_[2] + i]];
        k11 += Sw[2][0][i] * plate_state[dofs[loff_[2] + i]];
      }
      const double thp = theta_bar(plate_state, x[0], 1);
      const double rw1 = ribbon.eval(ribbon_state, RibbonField::W, 1, x[0]);
      const double rm = ribbon.eval(ribbon_state, RibbonField::Xi1, 1, x[0]) -
                        x[1] * ribbon.eval(ribbon_state, RibbonField::Xi2, 2, x[0]) + 0.5 * rw1 * rw1;
      const double dm = d1y1 + 0.5 * a * a - rm;
      const double dk = k11 - ribbon.eval(ribbon_state, RibbonField::W, 2, x[0]);
      const double dt = thp - ribbon.eval(ribbon_state, RibbonField::Theta, 1, x[0]);
      acc += quad_weight(e, q) * (c0 * dm * dm + r1(dk, dt) / 12.0);
    }
  }
  return acc;
}

Vec PlateModel::weak_residual_vector(const Vec& prev, const Vec& next, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("weak residual: tau must be positive");
  const Eigen::Matrix3d CW = material_.W.C, CR = material_.viscous_at(eps_).C;
  const double ie = 1.0 / eps_;
  Vec res = Vec::Zero(size());
  struct Fields {
    Eigen::Vector3d m, k;
    double a, b;
  };
  auto fields = [&](const Vec& u, const int* dofs, int q) {
    const auto& S1 = shapes_[q][0].d;
    const auto& S2 = shapes_[q][1].d;
    const auto& Sw = shapes_[q][2].d;
    double d1y1 = 0, d2y1 = 0, d1y2 = 0, d2y2 = 0, a = 0, b = 0, k11 = 0, k12 = 0, k22 = 0;
    for (int i = 0; i < spaces_[0].local_size(); ++i) {
      const double c = u[dofs[loff_[0] + i]];
      d1y1 += S1[1][0][i] * c;
      d2y1 += S1[0][1][i] * c;
    }
    for (int i = 0; i < spaces_[1].local_size(); ++i) {
      const double c = u[dofs[loff_[1] + i]];
      d1y2 += S2[1][0][i] * c;
      d2y2 += S2[0][1][i] * c;
    }
    for (int i = 0; i < spaces_[2].local_size(); ++i) {
      const double c = u[dofs[loff_[2] + i]];
      a += Sw[1][0][i] * c;
      b += Sw[0][1][i] * c;
      k11 += Sw[2][0][i] * c;
      k12 += Sw[1][1][i] * c;
      k22 += Sw[0][2][i] * c;
    }
    b *= ie;
    Fields F;
    F.a = a;
    F.b = b;
    F.m = Eigen::Vector3d(d1y1 + 0.5 * a * a, 0.5 * ie * (d1y2 + d2y1) + 0.5 * a * b, ie * ie * d2y2 + 0.5 * b * b);
    F.k = Eigen::Vector3d(k11, ie * k12, ie * ie * k22);
    return F;
  };
  for (int e = 0; e < element_count(); ++e) {
    int dofs[detail::kMaxLocal];
    element_dofs(e, dofs);
    for (int q = 0; q < quad_count(); ++q) {
      const double wq = quad_weight(e, q);
      const double x1 = quad_point(e, q)[0];
      const Fields n = fields(next, dofs, q), p = fields(prev, dofs, q);
      const Eigen::Vector3d sig = CW * n.m + CR * (n.m - p.m) / tau;
      const Eigen::Vector3d mom = (CW * n.k + CR * (n.k - p.k) / tau) / 12.0;
      const auto& S1 = shapes_[q][0].d;
      const auto& S2 = shapes_[q][1].d;
      const auto& Sw = shapes_[q][2].d;
      for (int i = 0; i < spaces_[0].local_size(); ++i)
        res[dofs[loff_[0] + i]] +=
            wq * (sig[0] * S1[1][0][i] + sig[1] * 0.5 * ie * S1[0][1][i] - forces_.g1(x1) * S1[0][0][i]);
      for (int i = 0; i < spaces_[1].local_size(); ++i)
        res[dofs[loff_[1] + i]] += wq * (sig[1] * 0.5 * ie * S2[1][0][i] + sig[2] * ie * ie * S2[0][1][i] -
                                         forces_.g2(x1) * S2[0][0][i]);
      for (int i = 0; i < spaces_[2].local_size(); ++i) {
        const double p1 = Sw[1][0][i], p2 = ie * Sw[0][1][i];
        const double memb = sig[0] * n.a * p1 + sig[1] * 0.5 * (n.a * p2 + n.b * p1) + sig[2] * n.b * p2;
        const double bend = mom[0] * Sw[2][0][i] + mom[1] * ie * Sw[1][1][i] + mom[2] * ie * ie * Sw[0][2][i];
        res[dofs[loff_[2] + i]] += wq * (memb + bend - forces_.f(x1) * Sw[0][0][i]);
      }
    }
  }
  return restrict_free(res, free_map_, free_count_);
}

Vec PlateModel::incremental_gradient(const Vec& prev, const Vec& next, double tau) const {
  Objective o;
  o.c_energy = 1.0;
  o.c_dist = 1.0 / tau;
  o.anchor = &prev;
  o.want_grad = true;
  return restrict_free(evaluate(next, o).grad, free_map_, free_count_);
}

namespace {

struct Cutoff {
  double half = 0.5;
  double width = 0.1;

  // value and first two derivatives of a C1 step equal to 1 away from the ends
  std::array<double, 3> operator()(double x) const {
    const double s = (half - std::abs(x)) / width;
    if (s >= 1.0) return {1.0, 0.0, 0.0};
    const double sc = std::max(0.0, s);
    const double sg = x >= 0 ? -1.0 : 1.0;  // ds/dx * width
    return {sc * sc * (3.0 - 2.0 * sc), 6.0 * sc * (1.0 - sc) * sg / width, 6.0 * (1.0 - 2.0 * sc) / (width * width)};
  }
};

}  // namespace

Vec build_recovery(const PlateModel& plate, const RibbonModel& ribbon, const Vec& target, const RecoveryOptions& opts) {
  return build_recovery(plate, ribbon, target, opts, nullptr);
}

Vec build_recovery(const PlateModel& plate, const RibbonModel& ribbon, const Vec& target, const RecoveryOptions& opts,
                   RecoveryTrace* trace) {
  if (target.size() != ribbon.size()) throw std::invalid_argument("recovery: target size mismatch");
  if (ribbon.trace_error(target) > 1e-12) throw std::invalid_argument("recovery: target violates the boundary data");
  if (std::abs(ribbon.mesh().length - plate.mesh().x.length) > 0.0)
    throw std::invalid_argument("recovery: ribbon and plate intervals differ");
  const double eps = plate.eps();
  const Mesh1D& m1 = ribbon.mesh();
  auto F = [&](RibbonField f, int d, double x) {
    return eval_nodal_average(m1, ribbon.kind(f), ribbon.field(target, f), d, x);
  };
  Cutoff chi;
  chi.half = 0.5 * m1.length;
  chi.width = opts.cutoff_width * m1.length * (opts.cutoff_scales_with_eps ? eps : 1.0);
  if (!(chi.width > 0.0) || chi.width > chi.half) throw std::invalid_argument("recovery: cutoff width out of range");

  const Eigen::Vector2d r = plate.material().W1().argmin_row;
  const double ends[2] = {m1.left(), -m1.left()};
  const double tiny = 1e-12;

  bool cut_theta = false, cut_gamma = false, cut_zeta = false;
  for (double x : ends) {
    if (std::abs(F(RibbonField::Theta, 0, x)) > tiny || std::abs(F(RibbonField::Theta, 1, x)) > tiny) cut_theta = true;
  }
  auto theta = [&](double x, int d) {
    const double t0 = F(RibbonField::Theta, 0, x), t1 = F(RibbonField::Theta, 1, x), t2 = F(RibbonField::Theta, 2, x);
    if (!cut_theta) return d == 0 ? t0 : d == 1 ? t1 : t2;
    const auto c = chi(x);
    if (d == 0) return t0 * c[0];
    if (d == 1) return t1 * c[0] + t0 * c[1];
    return t2 * c[0] + 2.0 * t1 * c[1] + t0 * c[2];
  };
  auto gamma_raw = [&](double x, int d) {
    return r[0] * F(RibbonField::W, 2 + d, x) + r[1] * theta(x, 1 + d);
  };
  auto g1 = [&](double x, int d) {  // d-th derivative of xi1' + w'^2/2
    const double w1 = F(RibbonField::W, 1, x), w2 = F(RibbonField::W, 2, x);
    return d == 0 ? F(RibbonField::Xi1, 1, x) + 0.5 * w1 * w1 : F(RibbonField::Xi1, 2, x) + w1 * w2;
  };
  auto zeta_raw = [&](double x1, double x2, int d) {
    return r[0] * (g1(x1, d) * (x2 + 0.5) - F(RibbonField::Xi2, 2 + d, x1) * (x2 * x2 - 0.25) * 0.5);
  };
  if (r.cwiseAbs().maxCoeff() > 0.0) {
    for (double x : ends) {
      if (std::abs(gamma_raw(x, 0)) > tiny || std::abs(gamma_raw(x, 1)) > tiny) cut_gamma = true;
      for (double x2 : {-0.5, 0.0, 0.5})
        if (std::abs(zeta_raw(x, x2, 0)) > tiny) cut_zeta = true;
    }
  }
  auto with_cut = [&](bool cut, double x, double v0, double v1, int d) {
    if (!cut) return d == 0 ? v0 : v1;
    const auto c = chi(x);
    return d == 0 ? v0 * c[0] : v1 * c[0] + v0 * c[1];
  };
  auto gamma = [&](double x, int d) { return with_cut(cut_gamma, x, gamma_raw(x, 0), gamma_raw(x, 1), d); };
  auto Z = [&](double x1, double x2, int d) {
    return with_cut(cut_zeta, x1, zeta_raw(x1, x2, 0), zeta_raw(x1, x2, 1), d);
  };
  if (trace) *trace = {cut_theta, cut_gamma, cut_zeta};

  const Function2D w = [&](double x1, double x2, int d1, int d2) {
    const double lin = d2 == 0 ? x2 : 1.0;
    const double quad = d2 == 0 ? 0.5 * (x2 + 0.5) * (x2 + 0.5) : (x2 + 0.5);
    const double base = d2 == 0 ? F(RibbonField::W, d1, x1) : 0.0;
    return base + eps * lin * theta(x1, d1) + eps * eps * gamma(x1, d1) * quad;
  };
  const Function2D y1 = [&](double x1, double x2, int, int) {
    return F(RibbonField::Xi1, 0, x1) - x2 * F(RibbonField::Xi2, 1, x1) - eps * x2 * F(RibbonField::W, 1, x1) * theta(x1, 0);
  };
  const Function2D y2 = [&](double x1, double x2, int d1, int) {
    const double t0 = theta(x1, 0);
    const double sq = d1 == 0 ? t0 * t0 : 2.0 * t0 * theta(x1, 1);
    return F(RibbonField::Xi2, d1, x1) - 0.5 * eps * eps * x2 * sq + eps * eps * Z(x1, x2, d1);
  };
  return plate.interpolate(y1, y2, w);
}

}  // namespace vkr
