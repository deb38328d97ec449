#pragma once

#include "vkr/fem.hpp"
#include "vkr/gradient_system.hpp"
#include "vkr/polynomial.hpp"
#include "vkr/quadratic_forms.hpp"
#include "vkr/strain_assembly.hpp"

#include <array>
#include <vector>

namespace vkr {

struct RibbonSpaces {
  Kind1D xi1 = Kind1D::P2;
  Kind1D xi2 = Kind1D::Hermite3;
  Kind1D w = Kind1D::Hermite3;
  Kind1D theta = Kind1D::Hermite3;
};

struct RibbonForces {
  Polynomial f;   // transverse load paired with w
  Polynomial g1;  // axial load paired with xi1
  Polynomial g2;  // in-plane transverse load paired with xi2
};

struct RibbonInitial {
  Polynomial xi1, xi2, w, theta;
};

enum class RibbonField { Xi1 = 0, Xi2 = 1, W = 2, Theta = 3 };

struct SlopeSolution {
  double slope = 0.0;            // sqrt(g^T M^-1 g)
  double representation = 0.0;  // || Rbar^{-1/2} (Wbar G + L) || on S
  double orthogonality = 0.0;    // max_i |int L.H(e_i) + load_i|
  double L_norm = 0.0;           // || L ||_{L2(S)}
  double stress_norm = 0.0;      // || Wbar G ||_{L2(S)}
  Vec minimizer;                 // full DOF vector, zero on constrained entries
};

// One-dimensional ribbon with x2-moments integrated exactly. Strain channels per
// point: (xi1' + w'^2/2, -xi2'', w'', theta').
class RibbonModel : public GradientSystem {
 public:
  RibbonModel(const Mesh1D& mesh, const MaterialPair& material, const BoundaryData& bc, const RibbonForces& forces,
              RibbonSpaces spaces = {}, int quad_order = 5);

  int size() const override { return offset_[4]; }
  const std::vector<char>& constrained() const override { return constrained_; }
  ObjectiveValue evaluate(const Vec& v, const Objective& obj) const override;

  const Mesh1D& mesh() const { return mesh_; }
  const RibbonSpaces& spaces() const { return spaces_; }
  const MaterialPair& material() const { return material_; }
  const BoundaryData& boundary() const { return bc_; }
  const RibbonForces& forces() const { return forces_; }
  Kind1D kind(RibbonField f) const;
  int offset(RibbonField f) const { return offset_[static_cast<int>(f)]; }
  int field_size(RibbonField f) const { return offset_[static_cast<int>(f) + 1] - offset_[static_cast<int>(f)]; }
  Vec field(const Vec& u, RibbonField f) const { return u.segment(offset(f), field_size(f)); }
  const Vec& load() const { return load_; }
  const detail::StrainMat& K_elastic() const { return KW_; }
  const detail::StrainMat& K_viscous() const { return KR_; }

  double metric(const Vec& a, const Vec& b) const { return dist(a, b); }

  // Interpolates polynomial data, then imposes the boundary values.
  Vec interpolate(const RibbonInitial& init) const;
  // Max deviation of constrained DOFs from the boundary values.
  double trace_error(const Vec& u) const;
  void apply_dirichlet(Vec& u) const;
  const Vec& boundary_values() const { return bvals_; }

  double eval(const Vec& u, RibbonField f, int deriv, double x) const;

  // Strain channels at every quadrature point (element-major).
  std::vector<Eigen::Vector4d> channels(const Vec& u) const;
  std::vector<double> quad_points() const;
  std::vector<double> quad_weights() const;

  // 1/2 int_S Wbar(G) - loads, evaluated with the extended 3x3 form and Gauss points in x2.
  double energy_extended(const Vec& u) const;
  // int_S Rbar(G(a) - G(b)) with the extended form.
  double sqdist_extended(const Vec& a, const Vec& b) const;

  SlopeSolution local_slope(const Vec& u) const;
  double slope(const Vec& u) const { return local_slope(u).slope; }

  // Pairings of the four weak equations (difference quotients in time) with every free basis function.
  Vec weak_residual_vector(const Vec& prev, const Vec& next, double tau) const;
  double weak_residual(const Vec& prev, const Vec& next, double tau) const {
    return incremental_weights(*this, prev, next, tau).cwiseProduct(weak_residual_vector(prev, next, tau)).norm();
  }

  // Gradient of v -> (1/2tau) D0(prev, v)^2 + phi0(v) restricted to free DOFs.
  Vec incremental_gradient(const Vec& prev, const Vec& next, double tau) const;

  // Element engine hooks.
  int element_count() const { return mesh_.n; }
  int local_size() const { return nloc_; }
  void element_dofs(int e, int* out) const;
  int quad_count() const { return static_cast<int>(rule_.t.size()); }
  double quad_weight(int, int q) const { return rule_.w[q] * mesh_.h(); }
  void point_strain(int e, int q, const detail::LocalVec& u, bool jac, detail::PointStrain& out) const;

 private:
  Mesh1D mesh_;
  MaterialPair material_;
  BoundaryData bc_;
  RibbonForces forces_;
  RibbonSpaces spaces_;
  QuadratureRule rule_;
  std::array<int, 5> offset_{};
  std::array<int, 5> loff_{};
  int nloc_ = 0;
  std::vector<char> constrained_;
  Vec bvals_;
  Vec load_;
  detail::StrainMat KW_, KR_;
  // shape tables per quadrature point per field
  std::vector<std::array<Shape1D, 4>> shapes_;
  std::vector<int> free_map_;
  int free_count_ = 0;
};

Vec mutual_shift(const Vec& zk, const Vec& z, const Vec& u);

}  // namespace vkr
