#include "vkr/gradient_system.hpp"

#include <algorithm>
#include <cmath>

namespace vkr {

double GradientSystem::energy(const Vec& v) const {
  Objective o;
  o.c_energy = 1.0;
  return evaluate(v, o).value;
}

double GradientSystem::sqdist(const Vec& a, const Vec& b) const {
  Objective o;
  o.c_dist = 2.0;
  o.anchor = &a;
  return evaluate(b, o).value;
}

double GradientSystem::dist(const Vec& a, const Vec& b) const { return std::sqrt(std::max(0.0, sqdist(a, b))); }

Vec GradientSystem::energy_gradient(const Vec& v) const {
  Objective o;
  o.c_energy = 1.0;
  o.want_grad = true;
  return evaluate(v, o).grad;
}

Vec GradientSystem::halfsq_gradient(const Vec& anchor, const Vec& v) const {
  Objective o;
  o.c_dist = 1.0;
  o.anchor = &anchor;
  o.want_grad = true;
  return evaluate(v, o).grad;
}

std::vector<int> free_index_map(const std::vector<char>& constrained, int* free_count) {
  std::vector<int> map(constrained.size(), -1);
  int k = 0;
  for (std::size_t i = 0; i < constrained.size(); ++i)
    if (!constrained[i]) map[i] = k++;
  if (free_count) *free_count = k;
  return map;
}

Vec restrict_free(const Vec& full, const std::vector<int>& free_map, int free_count) {
  Vec r(free_count);
  for (std::size_t i = 0; i < free_map.size(); ++i)
    if (free_map[i] >= 0) r[free_map[i]] = full[static_cast<Eigen::Index>(i)];
  return r;
}

Vec diagonal_weights(const SpMat& hess) {
  Vec d(hess.rows());
  for (int i = 0; i < hess.rows(); ++i) {
    const double hii = std::abs(hess.coeff(i, i));
    d[i] = hii > 0.0 ? 1.0 / std::sqrt(hii) : 1.0;
  }
  return d;
}

Vec incremental_weights(const GradientSystem& sys, const Vec& anchor, const Vec& v, double tau) {
  const std::vector<int> fmap = free_index_map(sys.constrained());
  Objective o;
  o.c_energy = 1.0;
  o.c_dist = 1.0 / tau;
  o.anchor = &anchor;
  o.want_hess = true;
  o.free_map = &fmap;
  return diagonal_weights(sys.evaluate(v, o).hess);
}

}  // namespace vkr
