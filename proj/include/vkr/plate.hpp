#pragma once

#include "vkr/fem.hpp"
#include "vkr/gradient_system.hpp"
#include "vkr/polynomial.hpp"
#include "vkr/quadratic_forms.hpp"
#include "vkr/ribbon.hpp"
#include "vkr/strain_assembly.hpp"

#include <array>
#include <vector>

namespace vkr {

enum class PlateField { Y1 = 0, Y2 = 1, W = 2 };

// Scaled in-plane strain, scaled gradient and scaled Hessian at one point.
struct ScaledOps {
  Eigen::Vector3d E;     // (E11, E12, E22) of the scaled symmetric gradient
  Eigen::Vector2d grad;  // (d1 w, d2 w / eps)
  Eigen::Vector3d hess;  // (d11 w, d12 w / eps, d22 w / eps^2)
};

// Plate on S = I x (-1/2, 1/2) in scaled variables. Loads come from the ribbon loads:
// f pairs with w, g1 with y1, g2 with y2 (the eps factors of the scaling cancel).
class PlateModel : public GradientSystem {
 public:
  PlateModel(const Mesh2D& mesh, const MaterialPair& material, const BoundaryData& bc, const RibbonForces& forces,
             double eps, int quad_order = 5);

  int size() const override { return offset_[3]; }
  const std::vector<char>& constrained() const override { return constrained_; }
  ObjectiveValue evaluate(const Vec& v, const Objective& obj) const override;

  double eps() const { return eps_; }
  const Mesh2D& mesh() const { return mesh_; }
  const MaterialPair& material() const { return material_; }
  const BoundaryData& boundary() const { return bc_; }
  const RibbonForces& forces() const { return forces_; }
  const TensorSpace& space(PlateField f) const { return spaces_[static_cast<int>(f)]; }
  int offset(PlateField f) const { return offset_[static_cast<int>(f)]; }
  int field_size(PlateField f) const { return space(f).size(); }
  Vec field(const Vec& u, PlateField f) const { return u.segment(offset(f), field_size(f)); }
  const Vec& load() const { return load_; }
  const Vec& boundary_values() const { return bvals_; }

  double metric(const Vec& a, const Vec& b) const { return dist(a, b); }
  double eval(const Vec& u, PlateField f, int d1, int d2, double x1, double x2) const;
  ScaledOps scaled_operators(const Vec& u, double x1, double x2) const;

  // Interpolates the three fields, then checks and imposes the lateral traces.
  Vec interpolate(const Function2D& y1, const Function2D& y2, const Function2D& w) const;
  double trace_error(const Vec& u) const;
  void apply_dirichlet(Vec& u) const;

  // x2-average of d2 w / eps, i.e. (w(x1, 1/2) - w(x1, -1/2)) / eps, and its x1-derivative.
  double theta_bar(const Vec& u, double x1, int deriv = 0) const;
  double twist(const Vec& u, double x1, double x2) const { return eval(u, PlateField::W, 0, 1, x1, x2) / eps_; }

  // D0^2 between the projection of a plate state and a ribbon state, integrated over S.
  double projected_sqdist(const Vec& plate_state, const RibbonModel& ribbon, const Vec& ribbon_state) const;

  Vec weak_residual_vector(const Vec& prev, const Vec& next, double tau) const;
  double weak_residual(const Vec& prev, const Vec& next, double tau) const {
    return incremental_weights(*this, prev, next, tau).cwiseProduct(weak_residual_vector(prev, next, tau)).norm();
  }
  Vec incremental_gradient(const Vec& prev, const Vec& next, double tau) const;

  // Element engine hooks.
  int element_count() const { return mesh_.element_count(); }
  int local_size() const { return nloc_; }
  void element_dofs(int e, int* out) const;
  int quad_count() const { return static_cast<int>(rule_.t.size() * rule_.t.size()); }
  double quad_weight(int, int q) const;
  void point_strain(int e, int q, const detail::LocalVec& u, bool jac, detail::PointStrain& out) const;
  // Physical coordinates of quadrature point q of element e.
  Eigen::Vector2d quad_point(int e, int q) const;

 private:
  Mesh2D mesh_;
  MaterialPair material_;
  BoundaryData bc_;
  RibbonForces forces_;
  double eps_;
  QuadratureRule rule_;
  std::array<TensorSpace, 3> spaces_;
  std::array<int, 4> offset_{};
  std::array<int, 4> loff_{};
  int nloc_ = 0;
  std::vector<char> constrained_;
  Vec bvals_;
  Vec load_;
  detail::StrainMat KW_, KR_;
  std::vector<std::array<Shape2D, 3>> shapes_;
  std::vector<int> free_map_;
  int free_count_ = 0;
};

struct RecoveryOptions {
  double cutoff_width = 0.1;          // fraction of l
  bool cutoff_scales_with_eps = false;  // width = cutoff_width * l * eps
};

// Static recovery state of a ribbon target on the plate model's mesh.
Vec build_recovery(const PlateModel& plate, const RibbonModel& ribbon, const Vec& target, const RecoveryOptions& opts = {});

// Which corrections needed the cutoff in the last build (for reporting).
struct RecoveryTrace {
  bool theta_cut = false;
  bool gamma_cut = false;
  bool zeta_cut = false;
};
Vec build_recovery(const PlateModel& plate, const RibbonModel& ribbon, const Vec& target, const RecoveryOptions& opts,
                   RecoveryTrace* trace);

}  // namespace vkr
