#pragma once

#include "vkr/ribbon.hpp"

#include <random>

namespace vkr::testing {

inline MaterialPair h1_material(double muW = 1.0, double muR = 1.0) {
  return {make_isotropic(muW, 0.0), make_isotropic(muR, 0.0), false};
}

inline Vec random_state(const GradientSystem& sys, const Vec& base, double amp, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-amp, amp);
  Vec v = base;
  for (int i = 0; i < v.size(); ++i)
    if (!sys.constrained()[i]) v[i] += u(rng);
  return v;
}

// Central differences of f over the free DOFs; returns the relative error against g.
template <class F>
double fd_relative_error(const GradientSystem& sys, F&& f, const Vec& v, const Vec& g, double h = 1e-5) {
  Vec fd = Vec::Zero(v.size());
  Vec w = v;
  for (int i = 0; i < v.size(); ++i) {
    if (sys.constrained()[i]) continue;
    w[i] = v[i] + h;
    const double fp = f(w);
    w[i] = v[i] - h;
    const double fm = f(w);
    w[i] = v[i];
    fd[i] = (fp - fm) / (2 * h);
  }
  Vec gg = g;
  for (int i = 0; i < v.size(); ++i)
    if (sys.constrained()[i]) gg[i] = 0.0;
  return (fd - gg).norm() / std::max(gg.norm(), 1e-300);
}

}  // namespace vkr::testing
