#pragma once

// Element engine for integrands of the form
//   c_energy * 1/2 s^T K_energy s + c_dist * 1/2 (s - s_anchor)^T K_dist (s - s_anchor)
// where the strain s is affine in the DOFs plus products (a.u)(b.u).

#include "vkr/gradient_system.hpp"

#include <Eigen/Dense>

#include <vector>

namespace vkr::detail {

constexpr int kMaxStrain = 6;
constexpr int kMaxLocal = 40;

using StrainVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxStrain, 1>;
using StrainMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxStrain, kMaxStrain>;
using StrainJac = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxStrain, kMaxLocal>;
using LocalVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxLocal, 1>;
using LocalMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxLocal, kMaxLocal>;

// s[k] contains coeff * (a.u) * (b.u)
struct CurvTerm {
  int k = 0;
  double coeff = 0.0;
  LocalVec a;
  LocalVec b;
};

struct PointStrain {
  StrainVec s;
  StrainJac J;
  int ncurv = 0;
  CurvTerm curv[3];
};

// Model requirements:
//   int element_count() const; int local_size() const; void element_dofs(int e, int* out) const;
//   int quad_count() const; double quad_weight(int e, int q) const;
//   void point_strain(int e, int q, const LocalVec& u, bool jac, PointStrain& out) const;
template <class Model>
ObjectiveValue evaluate_strain_objective(const Model& model, const StrainMat& K_energy, const StrainMat& K_dist,
                                         const Vec& load, const Vec& v, const Objective& obj, Exec ex) {
  const int ne = model.element_count();
  const int nl = model.local_size();
  const bool grad = obj.want_grad || obj.want_hess;
  std::vector<double> vals(ne, 0.0);
  std::vector<double> grads(grad ? static_cast<std::size_t>(ne) * nl : 0, 0.0);
  std::vector<double> hess(obj.want_hess ? static_cast<std::size_t>(ne) * nl * nl : 0, 0.0);
  const bool use_dist = obj.c_dist != 0.0;
  StrainMat K = obj.c_energy * K_energy;
  if (use_dist) K += obj.c_dist * K_dist;

  for_each_element(ne, ex, [&](int e) {
    int dofs[kMaxLocal];
    model.element_dofs(e, dofs);
    LocalVec ul(nl), ua(nl);
    for (int a = 0; a < nl; ++a) ul[a] = v[dofs[a]];
    if (use_dist)
      for (int a = 0; a < nl; ++a) ua[a] = (*obj.anchor)[dofs[a]];
    LocalVec g = LocalVec::Zero(nl);
    LocalMat H;
    if (obj.want_hess) H = LocalMat::Zero(nl, nl);
    double val = 0.0;
    PointStrain ps, pa;
    for (int q = 0; q < model.quad_count(); ++q) {
      const double wq = model.quad_weight(e, q);
      model.point_strain(e, q, ul, grad, ps);
      StrainVec sigma = obj.c_energy * (K_energy * ps.s);
      val += 0.5 * wq * obj.c_energy * ps.s.dot(K_energy * ps.s);
      if (use_dist) {
        model.point_strain(e, q, ua, false, pa);
        const StrainVec ds = ps.s - pa.s;
        const StrainVec kd = K_dist * ds;
        val += 0.5 * wq * obj.c_dist * ds.dot(kd);
        sigma += obj.c_dist * kd;
      }
      if (!grad) continue;
      g.noalias() += wq * (ps.J.transpose() * sigma);
      if (obj.want_hess) {
        const StrainJac KJ = K * ps.J;
        H.noalias() += wq * (ps.J.transpose() * KJ);
        for (int c = 0; c < ps.ncurv; ++c) {
          const CurvTerm& t = ps.curv[c];
          const double f = wq * sigma[t.k] * t.coeff;
          H.noalias() += f * (t.a * t.b.transpose() + t.b * t.a.transpose());
        }
      }
    }
    vals[e] = val;
    if (grad)
      for (int a = 0; a < nl; ++a) grads[static_cast<std::size_t>(e) * nl + a] = g[a];
    if (obj.want_hess)
      for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b) hess[(static_cast<std::size_t>(e) * nl + a) * nl + b] = H(a, b);
  });

  ObjectiveValue out;
  double total = 0.0;
  for (int e = 0; e < ne; ++e) total += vals[e];
  if (obj.c_energy != 0.0) total -= obj.c_energy * load.dot(v);
  out.value = total;
  if (grad) {
    out.grad = Vec::Zero(v.size());
    for (int e = 0; e < ne; ++e) {
      int dofs[kMaxLocal];
      model.element_dofs(e, dofs);
      for (int a = 0; a < nl; ++a) out.grad[dofs[a]] += grads[static_cast<std::size_t>(e) * nl + a];
    }
    if (obj.c_energy != 0.0) out.grad -= obj.c_energy * load;
  }
  if (obj.want_hess) {
    const std::vector<int>* fm = obj.free_map;
    int n = static_cast<int>(v.size());
    if (fm) {
      n = 0;
      for (int i : *fm) n = std::max(n, i + 1);
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(ne) * nl * nl);
    for (int e = 0; e < ne; ++e) {
      int dofs[kMaxLocal];
      model.element_dofs(e, dofs);
      for (int a = 0; a < nl; ++a) {
        const int ia = fm ? (*fm)[dofs[a]] : dofs[a];
        if (ia < 0) continue;
        for (int b = 0; b < nl; ++b) {
          const int ib = fm ? (*fm)[dofs[b]] : dofs[b];
          if (ib < 0) continue;
          trip.emplace_back(ia, ib, hess[(static_cast<std::size_t>(e) * nl + a) * nl + b]);
        }
      }
    }
    out.hess.resize(n, n);
    out.hess.setFromTriplets(trip.begin(), trip.end());
  }
  return out;
}

}  // namespace vkr::detail
