#pragma once

#include "vkr/fem.hpp"

#include <vector>

namespace vkr {

// Weighted combination c_energy * phi(v) + c_dist * 1/2 D(anchor, v)^2.
struct Objective {
  double c_energy = 0.0;
  double c_dist = 0.0;
  const Vec* anchor = nullptr;
  bool want_grad = false;
  bool want_hess = false;
  // Maps global DOF -> free index (or -1); when set the Hessian is the free-free block.
  const std::vector<int>* free_map = nullptr;
};

struct ObjectiveValue {
  double value = 0.0;
  Vec grad;
  SpMat hess;
};

class GradientSystem {
 public:
  virtual ~GradientSystem() = default;

  virtual int size() const = 0;
  virtual const std::vector<char>& constrained() const = 0;
  virtual ObjectiveValue evaluate(const Vec& v, const Objective& obj) const = 0;

  double energy(const Vec& v) const;
  double sqdist(const Vec& a, const Vec& b) const;
  double dist(const Vec& a, const Vec& b) const;
  Vec energy_gradient(const Vec& v) const;
  Vec halfsq_gradient(const Vec& anchor, const Vec& v) const;
};

std::vector<int> free_index_map(const std::vector<char>& constrained, int* free_count = nullptr);
Vec restrict_free(const Vec& full, const std::vector<int>& free_map, int free_count);

// d_i = 1/sqrt|H_ii| (1 where H_ii = 0). Residuals are measured as |d .* r|.
Vec diagonal_weights(const SpMat& hess);
// Weights from the free-free Hessian of v -> phi(v) + D(anchor, v)^2 / 2tau.
Vec incremental_weights(const GradientSystem& sys, const Vec& anchor, const Vec& v, double tau);

}  // namespace vkr
