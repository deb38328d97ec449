#include "vkr/ribbon.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <string>

namespace vkr {

namespace {

const char* field_name(int f) {
  static const char* names[] = {"xi1", "xi2", "w", "theta"};
  return names[f];
}

// Two-point Gauss rule on (-1/2, 1/2): exact for the quadratic x2-dependence.
constexpr double kX2 = 0.28867513459481288225;  // 1/(2 sqrt 3)

}  // namespace

RibbonModel::RibbonModel(const Mesh1D& mesh, const MaterialPair& material, const BoundaryData& bc,
                         const RibbonForces& forces, RibbonSpaces spaces, int quad_order)
    : mesh_(mesh), material_(material), bc_(bc), forces_(forces), spaces_(spaces), rule_(gauss_rule(quad_order)) {
  if (spaces_.xi2 != Kind1D::Hermite3 || spaces_.w != Kind1D::Hermite3)
    throw std::invalid_argument("ribbon: xi2 and w need C1 elements (Hermite3)");
  const Kind1D kinds[4] = {spaces_.xi1, spaces_.xi2, spaces_.w, spaces_.theta};
  offset_[0] = 0;
  loff_[0] = 0;
  for (int f = 0; f < 4; ++f) {
    offset_[f + 1] = offset_[f] + dof_count(kinds[f], mesh_.n);
    loff_[f + 1] = loff_[f] + local_dof_count(kinds[f]);
  }
  nloc_ = loff_[4];

  constrained_.assign(size(), 0);
  bvals_ = Vec::Zero(size());
  const Polynomial zero;
  const Polynomial* data[4] = {&bc_.u1, &bc_.u2, &bc_.v, &zero};
  for (int f = 0; f < 4; ++f) {
    const bool slopes = (f == 1 || f == 2);
    for (int i = 0; i < dof_count(kinds[f], mesh_.n); ++i) {
      if (!is_end_dof(kinds[f], mesh_.n, i)) continue;
      const DofFunctional d = dof_functional(kinds[f], mesh_, i);
      if (d.deriv != 0 && !slopes) continue;
      constrained_[offset_[f] + i] = 1;
      bvals_[offset_[f] + i] = (*data[f])(d.x, d.deriv);
    }
  }

  const QuadForm1 w1 = material_.W1(), r1 = material_.R1();
  const double c0w = reduce_to_0(w1).C0, c0r = reduce_to_0(r1).C0;
  KW_ = detail::StrainMat::Zero(4, 4);
  KR_ = detail::StrainMat::Zero(4, 4);
  KW_(0, 0) = c0w;
  KW_(1, 1) = c0w / 12.0;
  KW_.bottomRightCorner(2, 2) = w1.C / 12.0;
  KR_(0, 0) = c0r;
  KR_(1, 1) = c0r / 12.0;
  KR_.bottomRightCorner(2, 2) = r1.C / 12.0;

  shapes_.resize(rule_.t.size());
  for (std::size_t q = 0; q < rule_.t.size(); ++q)
    for (int f = 0; f < 4; ++f) shape_1d(kinds[f], rule_.t[q], mesh_.h(), shapes_[q][f]);

  load_ = Vec::Zero(size());
  const Polynomial* loads[3] = {&forces_.g1, &forces_.g2, &forces_.f};
  const int load_field[3] = {0, 1, 2};
  for (int e = 0; e < mesh_.n; ++e)
    for (std::size_t q = 0; q < rule_.t.size(); ++q) {
      const double x = mesh_.node(e) + rule_.t[q] * mesh_.h();
      const double wq = rule_.w[q] * mesh_.h();
      for (int j = 0; j < 3; ++j) {
        const int f = load_field[j];
        const double p = (*loads[j])(x);
        if (p == 0.0) continue;
        for (int a = 0; a < local_dof_count(kinds[f]); ++a)
          load_[offset_[f] + global_dof(kinds[f], e, a)] += wq * p * shapes_[q][f][0][a];
      }
    }
  free_map_ = free_index_map(constrained_, &free_count_);
}

Kind1D RibbonModel::kind(RibbonField f) const {
  switch (f) {
    case RibbonField::Xi1: return spaces_.xi1;
    case RibbonField::Xi2: return spaces_.xi2;
    case RibbonField::W: return spaces_.w;
    case RibbonField::Theta: return spaces_.theta;
  }
  return Kind1D::P1;
}

void RibbonModel::element_dofs(int e, int* out) const {
  const Kind1D kinds[4] = {spaces_.xi1, spaces_.xi2, spaces_.w, spaces_.theta};
  for (int f = 0; f < 4; ++f)
    for (int a = 0; a < local_dof_count(kinds[f]); ++a) out[loff_[f] + a] = offset_[f] + global_dof(kinds[f], e, a);
}

void RibbonModel::point_strain(int, int q, const detail::LocalVec& u, bool jac, detail::PointStrain& out) const {
  const auto& sh = shapes_[q];
  const int n1 = loff_[1] - loff_[0], n2 = loff_[2] - loff_[1], nw = loff_[3] - loff_[2], nt = loff_[4] - loff_[3];
  double xi1p = 0.0, xi2pp = 0.0, wp = 0.0, wpp = 0.0, thp = 0.0;
  for (int a = 0; a < n1; ++a) xi1p += sh[0][1][a] * u[loff_[0] + a];
  for (int a = 0; a < n2; ++a) xi2pp += sh[1][2][a] * u[loff_[1] + a];
  for (int a = 0; a < nw; ++a) {
    wp += sh[2][1][a] * u[loff_[2] + a];
    wpp += sh[2][2][a] * u[loff_[2] + a];
  }
  for (int a = 0; a < nt; ++a) thp += sh[3][1][a] * u[loff_[3] + a];
  out.s.resize(4);
  out.s << xi1p + 0.5 * wp * wp, -xi2pp, wpp, thp;
  out.ncurv = 0;
  if (!jac) return;
  out.J = detail::StrainJac::Zero(4, nloc_);
  for (int a = 0; a < n1; ++a) out.J(0, loff_[0] + a) = sh[0][1][a];
  for (int a = 0; a < n2; ++a) out.J(1, loff_[1] + a) = -sh[1][2][a];
  for (int a = 0; a < nw; ++a) {
    out.J(0, loff_[2] + a) = wp * sh[2][1][a];
    out.J(2, loff_[2] + a) = sh[2][2][a];
  }
  for (int a = 0; a < nt; ++a) out.J(3, loff_[3] + a) = sh[3][1][a];
  auto& c = out.curv[0];
  c.k = 0;
  c.coeff = 0.5;
  c.a = detail::LocalVec::Zero(nloc_);
  for (int a = 0; a < nw; ++a) c.a[loff_[2] + a] = sh[2][1][a];
  c.b = c.a;
  out.ncurv = 1;
}

ObjectiveValue RibbonModel::evaluate(const Vec& v, const Objective& obj) const {
  if (v.size() != size() || (obj.anchor && obj.anchor->size() != size()))
    throw std::invalid_argument("ribbon: state size mismatch");
  return detail::evaluate_strain_objective(*this, KW_, KR_, load_, v, obj, default_exec());
}

Vec RibbonModel::interpolate(const RibbonInitial& init) const {
  const Polynomial* p[4] = {&init.xi1, &init.xi2, &init.w, &init.theta};
  const Kind1D kinds[4] = {spaces_.xi1, spaces_.xi2, spaces_.w, spaces_.theta};
  Vec u(size());
  for (int f = 0; f < 4; ++f)
    u.segment(offset_[f], field_size(static_cast<RibbonField>(f))) =
        interpolate_1d(mesh_, kinds[f], [&](double x, int d) { return (*p[f])(x, d); });
  for (int i = 0; i < size(); ++i) {
    if (!constrained_[i]) continue;
    if (std::abs(u[i] - bvals_[i]) > 1e-10 * (1.0 + std::abs(bvals_[i]))) {
      int f = 0;
      while (i >= offset_[f + 1]) ++f;
      throw std::invalid_argument(std::string("initial ") + field_name(f) + " does not match the boundary data");
    }
    u[i] = bvals_[i];
  }
  return u;
}

double RibbonModel::trace_error(const Vec& u) const {
  double err = 0.0;
  for (int i = 0; i < size(); ++i)
    if (constrained_[i]) err = std::max(err, std::abs(u[i] - bvals_[i]));
  return err;
}

void RibbonModel::apply_dirichlet(Vec& u) const {
  for (int i = 0; i < size(); ++i)
    if (constrained_[i]) u[i] = bvals_[i];
}

double RibbonModel::eval(const Vec& u, RibbonField f, int deriv, double x) const {
  return eval_1d(mesh_, kind(f), field(u, f), deriv, x);
}

std::vector<Eigen::Vector4d> RibbonModel::channels(const Vec& u) const {
  std::vector<Eigen::Vector4d> out;
  out.reserve(static_cast<std::size_t>(mesh_.n) * quad_count());
  int dofs[detail::kMaxLocal];
  detail::PointStrain ps;
  for (int e = 0; e < mesh_.n; ++e) {
    element_dofs(e, dofs);
    detail::LocalVec ul(nloc_);
    for (int a = 0; a < nloc_; ++a) ul[a] = u[dofs[a]];
    for (int q = 0; q < quad_count(); ++q) {
      point_strain(e, q, ul, false, ps);
      out.emplace_back(ps.s[0], ps.s[1], ps.s[2], ps.s[3]);
    }
  }
  return out;
}

std::vector<double> RibbonModel::quad_points() const {
  std::vector<double> x;
  for (int e = 0; e < mesh_.n; ++e)
    for (int q = 0; q < quad_count(); ++q) x.push_back(mesh_.node(e) + rule_.t[q] * mesh_.h());
  return x;
}

std::vector<double> RibbonModel::quad_weights() const {
  std::vector<double> w;
  for (int e = 0; e < mesh_.n; ++e)
    for (int q = 0; q < quad_count(); ++q) w.push_back(quad_weight(e, q));
  return w;
}

double RibbonModel::energy_extended(const Vec& u) const {
  const ExtendedForm wbar = material_.Wbar();
  const auto ch = channels(u);
  const auto wts = quad_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < ch.size(); ++i)
    for (double x2 : {-kX2, kX2}) {
      const Eigen::Vector3d G(ch[i][0] + x2 * ch[i][1], ch[i][2], ch[i][3]);
      acc += 0.5 * wts[i] * 0.5 * G.dot(wbar.Q * G);
    }
  return acc - load_.dot(u);
}

double RibbonModel::sqdist_extended(const Vec& a, const Vec& b) const {
  const ExtendedForm rbar = material_.Rbar();
  const auto ca = channels(a), cb = channels(b);
  const auto wts = quad_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i)
    for (double x2 : {-kX2, kX2}) {
      const Eigen::Vector4d d = ca[i] - cb[i];
      const Eigen::Vector3d G(d[0] + x2 * d[1], d[2], d[3]);
      acc += wts[i] * 0.5 * G.dot(rbar.Q * G);
    }
  return acc;
}

SlopeSolution RibbonModel::local_slope(const Vec& u) const {
  Objective om;
  om.c_dist = 1.0;
  om.anchor = &u;
  om.want_hess = true;
  om.free_map = &free_map_;
  const SpMat M = evaluate(u, om).hess;
  const Vec b = restrict_free(energy_gradient(u), free_map_, free_count_);

  SlopeSolution sol;
  sol.minimizer = Vec::Zero(size());
  if (free_count_ == 0) return sol;
  Eigen::SimplicialLDLT<SpMat> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("slope: metric Hessian factorization failed");
  const Vec vstar = ldlt.solve(b);
  sol.slope = std::sqrt(std::max(0.0, b.dot(vstar)));
  for (int i = 0; i < size(); ++i)
    if (free_map_[i] >= 0) sol.minimizer[i] = vstar[free_map_[i]];

  const ExtendedForm wbar = material_.Wbar(), rbar = material_.Rbar();
  Vec orth = Vec::Zero(size());
  double rep = 0.0, lnorm = 0.0, snorm = 0.0;
  int dofs[detail::kMaxLocal];
  detail::PointStrain ps;
  for (int e = 0; e < mesh_.n; ++e) {
    element_dofs(e, dofs);
    detail::LocalVec ul(nloc_), vl(nloc_);
    for (int a = 0; a < nloc_; ++a) {
      ul[a] = u[dofs[a]];
      vl[a] = sol.minimizer[dofs[a]];
    }
    for (int q = 0; q < quad_count(); ++q) {
      point_strain(e, q, ul, true, ps);
      const detail::StrainVec h = ps.J * vl;
      const double wq = quad_weight(e, q);
      for (double x2 : {-kX2, kX2}) {
        const double w = 0.5 * wq;
        const Eigen::Vector3d G(ps.s[0] + x2 * ps.s[1], ps.s[2], ps.s[3]);
        const Eigen::Vector3d H(h[0] + x2 * h[1], h[2], h[3]);
        const Eigen::Vector3d L = rbar.Q * H - wbar.Q * G;
        rep += w * (rbar.invsqrt * (wbar.Q * G + L)).squaredNorm();
        lnorm += w * L.squaredNorm();
        snorm += w * (wbar.Q * G).squaredNorm();
        for (int a = 0; a < nloc_; ++a) {
          const Eigen::Vector3d Ha(ps.J(0, a) + x2 * ps.J(1, a), ps.J(2, a), ps.J(3, a));
          orth[dofs[a]] += w * L.dot(Ha);
        }
      }
    }
  }
  orth += load_;
  double omax = 0.0;
  for (int i = 0; i < size(); ++i)
    if (free_map_[i] >= 0) omax = std::max(omax, std::abs(orth[i]));
  sol.representation = std::sqrt(rep);
  sol.L_norm = std::sqrt(lnorm);
  sol.stress_norm = std::sqrt(snorm);
  sol.orthogonality = omax;
  return sol;
}

Vec RibbonModel::weak_residual_vector(const Vec& prev, const Vec& next, double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("weak residual: tau must be positive");
  const QuadForm1 w1 = material_.W1(), r1 = material_.R1();
  const double c0w = reduce_to_0(w1).C0, c0r = reduce_to_0(r1).C0;
  const Kind1D kinds[4] = {spaces_.xi1, spaces_.xi2, spaces_.w, spaces_.theta};
  Vec res = Vec::Zero(size());
  auto value = [&](const Vec& u, int f, int d, int e, int q) {
    double s = 0.0;
    for (int a = 0; a < local_dof_count(kinds[f]); ++a)
      s += shapes_[q][f][d][a] * u[offset_[f] + global_dof(kinds[f], e, a)];
    return s;
  };
  for (int e = 0; e < mesh_.n; ++e)
    for (int q = 0; q < quad_count(); ++q) {
      const double wq = quad_weight(e, q);
      const double x = mesh_.node(e) + rule_.t[q] * mesh_.h();
      const double wp = value(next, 2, 1, e, q), wpp = value(next, 2, 2, e, q);
      const double m_next = value(next, 0, 1, e, q) + 0.5 * wp * wp;
      const double wp0 = value(prev, 2, 1, e, q);
      const double m_prev = value(prev, 0, 1, e, q) + 0.5 * wp0 * wp0;
      const double xi2pp = value(next, 1, 2, e, q), xi2pp0 = value(prev, 1, 2, e, q);
      const double thp = value(next, 3, 1, e, q), thp0 = value(prev, 3, 1, e, q);
      const double wpp0 = value(prev, 2, 2, e, q);

      const double N = c0w * m_next + c0r * (m_next - m_prev) / tau;
      const double Mb = (c0w * xi2pp + c0r * (xi2pp - xi2pp0) / tau) / 12.0;
      const Eigen::Vector2d B = (dQ1(w1, wpp, thp) + dQ1(r1, wpp - wpp0, thp - thp0) / tau) / 24.0;

      const auto& s = shapes_[q];
      for (int a = 0; a < local_dof_count(kinds[0]); ++a)
        res[offset_[0] + global_dof(kinds[0], e, a)] += wq * (N * s[0][1][a] - forces_.g1(x) * s[0][0][a]);
      for (int a = 0; a < local_dof_count(kinds[1]); ++a)
        res[offset_[1] + global_dof(kinds[1], e, a)] += wq * (Mb * s[1][2][a] - forces_.g2(x) * s[1][0][a]);
      for (int a = 0; a < local_dof_count(kinds[2]); ++a)
        res[offset_[2] + global_dof(kinds[2], e, a)] +=
            wq * (N * wp * s[2][1][a] + B[0] * s[2][2][a] - forces_.f(x) * s[2][0][a]);
      for (int a = 0; a < local_dof_count(kinds[3]); ++a)
        res[offset_[3] + global_dof(kinds[3], e, a)] += wq * B[1] * s[3][1][a];
    }
  return restrict_free(res, free_map_, free_count_);
}

Vec RibbonModel::incremental_gradient(const Vec& prev, const Vec& next, double tau) const {
  Objective o;
  o.c_energy = 1.0;
  o.c_dist = 1.0 / tau;
  o.anchor = &prev;
  o.want_grad = true;
  return restrict_free(evaluate(next, o).grad, free_map_, free_count_);
}

Vec mutual_shift(const Vec& zk, const Vec& z, const Vec& u) {
  if (zk.size() != z.size() || z.size() != u.size()) throw std::invalid_argument("mutual_shift: size mismatch");
  return u + (zk - z);
}

}  // namespace vkr
