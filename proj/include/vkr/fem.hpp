#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <vector>

namespace vkr {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

enum class Exec { Parallel, Serial };

// Process-wide switch; Serial is the reference mode used for bitwise checks.
Exec default_exec();
void set_default_exec(Exec e);

template <class F>
void for_each_element(int count, Exec ex, F&& f) {
  if (ex == Exec::Serial) {
    for (int e = 0; e < count; ++e) f(e);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int e = 0; e < count; ++e) f(e);
}

struct QuadratureRule {
  std::vector<double> t;  // points in [0, 1]
  std::vector<double> w;  // weights summing to 1
};

// Gauss-Legendre rule with `order` points (1..10).
QuadratureRule gauss_rule(int order);

enum class Kind1D { P1, P2, Hermite3 };

const char* to_string(Kind1D k);

struct Mesh1D {
  double length = 1.0;
  int n = 2;

  Mesh1D() = default;
  Mesh1D(double l, int elements);
  double h() const { return length / n; }
  double left() const { return -0.5 * length; }
  double node(int i) const { return left() + i * h(); }
};

struct Mesh2D {
  Mesh1D x;
  int ny = 2;

  Mesh2D() = default;
  Mesh2D(double l, int nx, int ny_);
  int nx() const { return x.n; }
  double hy() const { return 1.0 / ny; }
  int element_count() const { return x.n * ny; }
};

int dof_count(Kind1D k, int n);
int local_dof_count(Kind1D k);
int max_derivative(Kind1D k);
int global_dof(Kind1D k, int elem, int local);

// Interpolation functional of a global DOF: derivative `deriv` at `x`.
struct DofFunctional {
  double x;
  int deriv;
};
DofFunctional dof_functional(Kind1D k, const Mesh1D& mesh, int dof);
bool is_end_dof(Kind1D k, int n, int dof);

// Shape values on an element of size h at local coordinate t in [0,1]:
// out[d][a] is the d-th physical derivative of local function a.
using Shape1D = std::array<std::array<double, 4>, 3>;
void shape_1d(Kind1D k, double t, double h, Shape1D& out);

double eval_1d(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv, double x);
double eval_on_element(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv, int elem, double t);
// Derivative of order deriv (up to max_derivative + 1) with one-sided values averaged at nodes.
double eval_nodal_average(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv, double x);
std::vector<double> eval_field_1d(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv,
                                  const std::vector<double>& points);

// f(x, deriv) supplies the interpolated function and its first derivative.
Vec interpolate_1d(const Mesh1D& mesh, Kind1D k, const std::function<double(double, int)>& f);

// Bilinear density: density(x, test_derivs, trial_derivs) with derivs[d] the d-th derivative.
using Density1D = std::function<double(double, const std::array<double, 3>&, const std::array<double, 3>&)>;
SpMat assemble_quadratic(const Mesh1D& mesh, Kind1D test, Kind1D trial, const Density1D& density,
                         const QuadratureRule& rule, Exec ex = default_exec());

// Tensor-product space on S: kind kx along x1 times ky along x2.
struct TensorSpace {
  Kind1D kx = Kind1D::P1;
  Kind1D ky = Kind1D::P1;
  int nx = 2;
  int ny = 2;

  int nxdof() const { return dof_count(kx, nx); }
  int nydof() const { return dof_count(ky, ny); }
  int size() const { return nxdof() * nydof(); }
  int local_size() const { return local_dof_count(kx) * local_dof_count(ky); }
  int index(int gx, int gy) const { return gx * nydof() + gy; }
  // Global DOFs of element (ex, ey) in local order (ax major, ay minor).
  void element_dofs(int ex, int ey, int* out) const;
};

TensorSpace bfs_space(const Mesh2D& m);

// Partial derivatives (d1, d2) with d1, d2 in {0,1,2}: out[d1][d2][a].
struct Shape2D {
  std::array<std::array<std::array<double, 16>, 3>, 3> d{};
};
void shape_2d(const TensorSpace& s, double tx, double ty, double hx, double hy, Shape2D& out);

// f(x1, x2, d1, d2) supplies mixed partials up to order one in each variable.
using Function2D = std::function<double(double, double, int, int)>;
Vec interpolate_2d(const Mesh2D& mesh, const TensorSpace& s, const Function2D& f);
double eval_2d(const Mesh2D& mesh, const TensorSpace& s, const Vec& coeffs, int d1, int d2, double x1, double x2);

// DOFs on the lateral edges x1 = +-l/2; with_x1_slopes adds the x1-derivative DOFs.
std::vector<int> lateral_dofs(const TensorSpace& s, bool with_x1_slopes);

}  // namespace vkr
