#include "vkr/fem.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vkr {

namespace {

Exec g_exec = Exec::Parallel;

template <int N>
QuadratureRule gauss_impl() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  QuadratureRule r;
  // abscissae are the non-negative half of the symmetric rule
  for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i) {
    if (x[i] == 0.0) continue;
    r.t.push_back(0.5 * (1.0 - x[i]));
    r.w.push_back(0.5 * w[i]);
  }
  if (N % 2 == 1) {
    r.t.push_back(0.5);
    r.w.push_back(0.5 * w[0]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    r.t.push_back(0.5 * (1.0 + x[i]));
    r.w.push_back(0.5 * w[i]);
  }
  return r;
}

int element_of(const Mesh1D& mesh, double x, double& t) {
  const double s = (x - mesh.left()) / mesh.h();
  int e = static_cast<int>(std::floor(s));
  e = std::clamp(e, 0, mesh.n - 1);
  t = s - e;
  return e;
}

}  // namespace

Exec default_exec() { return g_exec; }
void set_default_exec(Exec e) { g_exec = e; }

QuadratureRule gauss_rule(int order) {
  switch (order) {
    case 1: return gauss_impl<1>();
    case 2: return gauss_impl<2>();
    case 3: return gauss_impl<3>();
    case 4: return gauss_impl<4>();
    case 5: return gauss_impl<5>();
    case 6: return gauss_impl<6>();
    case 7: return gauss_impl<7>();
    case 8: return gauss_impl<8>();
    case 9: return gauss_impl<9>();
    case 10: return gauss_impl<10>();
    default: throw std::invalid_argument("gauss_rule: order must be in 1..10");
  }
}

const char* to_string(Kind1D k) {
  switch (k) {
    case Kind1D::P1: return "P1";
    case Kind1D::P2: return "P2";
    case Kind1D::Hermite3: return "Hermite3";
  }
  return "?";
}

Mesh1D::Mesh1D(double l, int elements) : length(l), n(elements) {
  if (!(l > 0.0)) throw std::invalid_argument("mesh: length must be positive");
  if (elements < 2) throw std::invalid_argument("mesh: need at least 2 elements");
}

Mesh2D::Mesh2D(double l, int nx, int ny_) : x(l, nx), ny(ny_) {
  if (ny_ < 2) throw std::invalid_argument("mesh: need at least 2 elements across the width");
}

int dof_count(Kind1D k, int n) {
  switch (k) {
    case Kind1D::P1: return n + 1;
    case Kind1D::P2: return 2 * n + 1;
    case Kind1D::Hermite3: return 2 * (n + 1);
  }
  return 0;
}

int local_dof_count(Kind1D k) {
  switch (k) {
    case Kind1D::P1: return 2;
    case Kind1D::P2: return 3;
    case Kind1D::Hermite3: return 4;
  }
  return 0;
}

int max_derivative(Kind1D k) { return k == Kind1D::P1 ? 1 : 2; }

int global_dof(Kind1D k, int elem, int local) {
  switch (k) {
    case Kind1D::P1: return elem + local;
    case Kind1D::P2:
    case Kind1D::Hermite3: return 2 * elem + local;
  }
  return 0;
}

DofFunctional dof_functional(Kind1D k, const Mesh1D& mesh, int dof) {
  switch (k) {
    case Kind1D::P1: return {mesh.node(dof), 0};
    case Kind1D::P2: return {mesh.left() + 0.5 * dof * mesh.h(), 0};
    case Kind1D::Hermite3: return {mesh.node(dof / 2), dof % 2};
  }
  return {0.0, 0};
}

bool is_end_dof(Kind1D k, int n, int dof) {
  switch (k) {
    case Kind1D::P1: return dof == 0 || dof == n;
    case Kind1D::P2: return dof == 0 || dof == 2 * n;
    case Kind1D::Hermite3: return dof <= 1 || dof >= 2 * n;
  }
  return false;
}

void shape_1d(Kind1D k, double t, double h, Shape1D& out) {
  for (auto& row : out) row.fill(0.0);
  const double ih = 1.0 / h;
  switch (k) {
    case Kind1D::P1:
      out[0][0] = 1.0 - t;
      out[0][1] = t;
      out[1][0] = -ih;
      out[1][1] = ih;
      break;
    case Kind1D::P2:
      out[0][0] = (1.0 - t) * (1.0 - 2.0 * t);
      out[0][1] = 4.0 * t * (1.0 - t);
      out[0][2] = t * (2.0 * t - 1.0);
      out[1][0] = (4.0 * t - 3.0) * ih;
      out[1][1] = (4.0 - 8.0 * t) * ih;
      out[1][2] = (4.0 * t - 1.0) * ih;
      out[2][0] = 4.0 * ih * ih;
      out[2][1] = -8.0 * ih * ih;
      out[2][2] = 4.0 * ih * ih;
      break;
    case Kind1D::Hermite3: {
      const double t2 = t * t, t3 = t2 * t;
      out[0][0] = 1.0 - 3.0 * t2 + 2.0 * t3;
      out[0][1] = h * (t - 2.0 * t2 + t3);
      out[0][2] = 3.0 * t2 - 2.0 * t3;
      out[0][3] = h * (t3 - t2);
      out[1][0] = (6.0 * t2 - 6.0 * t) * ih;
      out[1][1] = 1.0 - 4.0 * t + 3.0 * t2;
      out[1][2] = (6.0 * t - 6.0 * t2) * ih;
      out[1][3] = 3.0 * t2 - 2.0 * t;
      out[2][0] = (12.0 * t - 6.0) * ih * ih;
      out[2][1] = (6.0 * t - 4.0) * ih;
      out[2][2] = (6.0 - 12.0 * t) * ih * ih;
      out[2][3] = (6.0 * t - 2.0) * ih;
      break;
    }
  }
}

double eval_1d(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv, double x) {
  if (deriv < 0 || deriv > max_derivative(k)) throw std::invalid_argument("eval_1d: derivative order out of range");
  if (coeffs.size() != dof_count(k, mesh.n)) throw std::invalid_argument("eval_1d: coefficient count mismatch");
  double t = 0.0;
  const int e = element_of(mesh, x, t);
  Shape1D s;
  shape_1d(k, t, mesh.h(), s);
  double v = 0.0;
  for (int a = 0; a < local_dof_count(k); ++a) v += s[deriv][a] * coeffs[global_dof(k, e, a)];
  return v;
}

double eval_on_element(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv, int elem, double t) {
  if (deriv == max_derivative(k) + 1) {
    // top derivative is constant on each element
    return (eval_on_element(mesh, k, coeffs, deriv - 1, elem, 1.0) - eval_on_element(mesh, k, coeffs, deriv - 1, elem, 0.0)) /
           mesh.h();
  }
  if (deriv < 0 || deriv > max_derivative(k)) throw std::invalid_argument("eval_on_element: derivative order out of range");
  Shape1D s;
  shape_1d(k, t, mesh.h(), s);
  double v = 0.0;
  for (int a = 0; a < local_dof_count(k); ++a) v += s[deriv][a] * coeffs[global_dof(k, elem, a)];
  return v;
}

double eval_nodal_average(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv, double x) {
  const double s = (x - mesh.left()) / mesh.h();
  const int i = static_cast<int>(std::lround(s));
  if (std::abs(s - i) < 1e-10 && i >= 0 && i <= mesh.n) {
    double acc = 0.0;
    int cnt = 0;
    if (i > 0) {
      acc += eval_on_element(mesh, k, coeffs, deriv, i - 1, 1.0);
      ++cnt;
    }
    if (i < mesh.n) {
      acc += eval_on_element(mesh, k, coeffs, deriv, i, 0.0);
      ++cnt;
    }
    return acc / cnt;
  }
  double t = 0.0;
  const int e = element_of(mesh, x, t);
  return eval_on_element(mesh, k, coeffs, deriv, e, t);
}

std::vector<double> eval_field_1d(const Mesh1D& mesh, Kind1D k, const Vec& coeffs, int deriv,
                                  const std::vector<double>& points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) out.push_back(eval_1d(mesh, k, coeffs, deriv, x));
  return out;
}

Vec interpolate_1d(const Mesh1D& mesh, Kind1D k, const std::function<double(double, int)>& f) {
  Vec c(dof_count(k, mesh.n));
  for (int i = 0; i < c.size(); ++i) {
    const DofFunctional d = dof_functional(k, mesh, i);
    c[i] = f(d.x, d.deriv);
  }
  return c;
}

SpMat assemble_quadratic(const Mesh1D& mesh, Kind1D test, Kind1D trial, const Density1D& density,
                         const QuadratureRule& rule, Exec ex) {
  const int nt = local_dof_count(test), nr = local_dof_count(trial);
  std::vector<double> local(static_cast<std::size_t>(mesh.n) * nt * nr, 0.0);
  const double h = mesh.h();
  for_each_element(mesh.n, ex, [&](int e) {
    double* L = &local[static_cast<std::size_t>(e) * nt * nr];
    Shape1D st, sr;
    for (std::size_t q = 0; q < rule.t.size(); ++q) {
      shape_1d(test, rule.t[q], h, st);
      shape_1d(trial, rule.t[q], h, sr);
      const double x = mesh.node(e) + rule.t[q] * h;
      for (int a = 0; a < nt; ++a) {
        const std::array<double, 3> da{st[0][a], st[1][a], st[2][a]};
        for (int b = 0; b < nr; ++b) {
          const std::array<double, 3> db{sr[0][b], sr[1][b], sr[2][b]};
          L[a * nr + b] += rule.w[q] * h * density(x, da, db);
        }
      }
    }
  });
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(local.size());
  for (int e = 0; e < mesh.n; ++e)
    for (int a = 0; a < nt; ++a)
      for (int b = 0; b < nr; ++b)
        trip.emplace_back(global_dof(test, e, a), global_dof(trial, e, b),
                          local[(static_cast<std::size_t>(e) * nt + a) * nr + b]);
  SpMat M(dof_count(test, mesh.n), dof_count(trial, mesh.n));
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

void TensorSpace::element_dofs(int ex, int ey, int* out) const {
  const int lx = local_dof_count(kx), ly = local_dof_count(ky);
  for (int ax = 0; ax < lx; ++ax)
    for (int ay = 0; ay < ly; ++ay) out[ax * ly + ay] = index(global_dof(kx, ex, ax), global_dof(ky, ey, ay));
}

TensorSpace bfs_space(const Mesh2D& m) { return {Kind1D::Hermite3, Kind1D::Hermite3, m.nx(), m.ny}; }

void shape_2d(const TensorSpace& s, double tx, double ty, double hx, double hy, Shape2D& out) {
  Shape1D sx, sy;
  shape_1d(s.kx, tx, hx, sx);
  shape_1d(s.ky, ty, hy, sy);
  const int lx = local_dof_count(s.kx), ly = local_dof_count(s.ky);
  for (int d1 = 0; d1 < 3; ++d1)
    for (int d2 = 0; d2 < 3; ++d2) {
      auto& row = out.d[d1][d2];
      row.fill(0.0);
      for (int ax = 0; ax < lx; ++ax)
        for (int ay = 0; ay < ly; ++ay) row[ax * ly + ay] = sx[d1][ax] * sy[d2][ay];
    }
}

Vec interpolate_2d(const Mesh2D& mesh, const TensorSpace& s, const Function2D& f) {
  const Mesh1D ymesh(1.0, mesh.ny);
  Vec c(s.size());
  for (int gx = 0; gx < s.nxdof(); ++gx) {
    const DofFunctional fx = dof_functional(s.kx, mesh.x, gx);
    for (int gy = 0; gy < s.nydof(); ++gy) {
      const DofFunctional fy = dof_functional(s.ky, ymesh, gy);
      c[s.index(gx, gy)] = f(fx.x, fy.x, fx.deriv, fy.deriv);
    }
  }
  return c;
}

double eval_2d(const Mesh2D& mesh, const TensorSpace& s, const Vec& coeffs, int d1, int d2, double x1, double x2) {
  if (d1 < 0 || d2 < 0 || d1 > max_derivative(s.kx) || d2 > max_derivative(s.ky))
    throw std::invalid_argument("eval_2d: derivative order out of range");
  double tx = 0.0, ty = 0.0;
  const int ex = element_of(mesh.x, x1, tx);
  const int ey = element_of(Mesh1D(1.0, mesh.ny), x2, ty);
  Shape2D sh;
  shape_2d(s, tx, ty, mesh.x.h(), mesh.hy(), sh);
  int dofs[16];
  s.element_dofs(ex, ey, dofs);
  double v = 0.0;
  for (int a = 0; a < s.local_size(); ++a) v += sh.d[d1][d2][a] * coeffs[dofs[a]];
  return v;
}

std::vector<int> lateral_dofs(const TensorSpace& s, bool with_x1_slopes) {
  const Mesh1D mx(1.0, s.nx);
  std::vector<int> out;
  for (int gx = 0; gx < s.nxdof(); ++gx) {
    if (!is_end_dof(s.kx, s.nx, gx)) continue;
    if (dof_functional(s.kx, mx, gx).deriv != 0 && !with_x1_slopes) continue;
    for (int gy = 0; gy < s.nydof(); ++gy) out.push_back(s.index(gx, gy));
  }
  return out;
}

}  // namespace vkr
