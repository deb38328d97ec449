#include "vkr/minimizing_movements.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <string>

namespace vkr {

StepResult incremental_step(const GradientSystem& sys, double tau, const Vec& u_prev, const SolverOptions& opts) {
  if (!(tau > 0.0)) throw std::invalid_argument("incremental_step: tau must be positive");
  int nfree = 0;
  const std::vector<int> fmap = free_index_map(sys.constrained(), &nfree);
  Objective obj;
  obj.c_energy = 1.0;
  obj.c_dist = 1.0 / tau;
  obj.anchor = &u_prev;
  obj.free_map = &fmap;

  StepResult res;
  res.u = u_prev;
  const double scale = 1.0 + std::abs(sys.energy(u_prev));
  res.report.tol = opts.tol * scale;

  auto value_at = [&](const Vec& v) {
    Objective o = obj;
    return sys.evaluate(v, o).value;
  };
  auto grad_at = [&](const Vec& v) {
    Objective o = obj;
    o.want_grad = true;
    return restrict_free(sys.evaluate(v, o).grad, fmap, nfree);
  };

  for (int it = 0; it <= opts.max_newton; ++it) {
    Objective o = obj;
    o.want_grad = true;
    o.want_hess = true;
    ObjectiveValue ev = sys.evaluate(res.u, o);
    const Vec g = restrict_free(ev.grad, fmap, nfree);
    const Vec d = diagonal_weights(ev.hess);
    res.report.grad_norm = d.cwiseProduct(g).norm();
    res.report.objective = ev.value;
    res.report.iterations = it;
    if (res.report.grad_norm <= res.report.tol) {
      res.report.converged = true;
      return res;
    }
    if (it == opts.max_newton) break;

    const SpMat Hs = d.asDiagonal() * ev.hess * d.asDiagonal();
    Vec p;
    bool newton = false;
    Eigen::SimplicialLDLT<SpMat> ldlt(Hs);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
      p = -(d.asDiagonal() * ldlt.solve(d.asDiagonal() * g)).eval();
      newton = p.allFinite() && g.dot(p) < 0.0;
    }
    if (!newton) {
      if (!opts.gradient_fallback) throw std::runtime_error("incremental_step: Newton direction is not a descent direction");
      p = -(d.array().square() * g.array()).matrix();
      ++res.report.fallbacks;
    }

    const double slope0 = g.dot(p);
    double alpha = 1.0;
    bool accepted = false;
    Vec trial = res.u;
    for (int k = 0; k < opts.max_backtracks; ++k) {
      trial = res.u;
      for (std::size_t i = 0; i < fmap.size(); ++i)
        if (fmap[i] >= 0) trial[static_cast<Eigen::Index>(i)] += alpha * p[fmap[i]];
      const double vt = value_at(trial);
      if (std::isfinite(vt) && vt <= ev.value + opts.armijo * alpha * slope0) {
        accepted = true;
        break;
      }
      // near the minimizer the decrease is below the resolution of the objective
      if (std::isfinite(vt) && std::abs(vt - ev.value) <= 1e-14 * (1.0 + std::abs(ev.value)) &&
          d.cwiseProduct(grad_at(trial)).norm() < res.report.grad_norm) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    res.u = trial;
  }
  res.report.converged = false;
  return res;
}

const Vec& Trajectory::state_at(double t) const {
  if (states.empty()) throw std::logic_error("trajectory: no states");
  if (t <= 0.0) return states.front();
  int n = static_cast<int>(std::ceil(t / tau - 1e-9));
  n = std::max(1, std::min(n, steps()));
  return states[n];
}

Trajectory run_trajectory(const GradientSystem& sys, const Vec& u0, double tau, double T, const SolverOptions& opts,
                          const RunHooks& hooks) {
  if (!(T > 0.0)) throw std::invalid_argument("run_trajectory: T must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("run_trajectory: tau must be positive");
  const int N = std::max(1, static_cast<int>(std::ceil(T / tau - 1e-9)));
  Trajectory tr;
  tr.tau = tau;
  tr.T = T;
  tr.states.reserve(N + 1);
  tr.states.push_back(u0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  LedgerRow r0;
  r0.energy = sys.energy(u0);
  r0.slope = hooks.slope ? hooks.slope(u0) : nan;
  tr.ledger.push_back(r0);
  for (int n = 1; n <= N; ++n) {
    const Vec& prev = tr.states.back();
    StepResult st = incremental_step(sys, tau, prev, opts);
    if (!st.report.converged)
      throw SolverFailure(n, "step " + std::to_string(n) + ": Newton did not converge (gradient norm " +
                                 std::to_string(st.report.grad_norm) + ")");
    LedgerRow row;
    row.n = n;
    row.t = n * tau;
    row.energy = sys.energy(st.u);
    row.step_dist = sys.dist(prev, st.u);
    row.slope = hooks.slope ? hooks.slope(st.u) : nan;
    row.phi_residual = hooks.residual ? hooks.residual(prev, st.u, tau) : st.report.grad_norm;
    row.newton_iters = st.report.iterations;
    if (hooks.on_step) hooks.on_step(n, prev, st.u);
    tr.states.push_back(std::move(st.u));
    tr.ledger.push_back(row);
  }
  return tr;
}

DeGiorgiLedger dissipation_ledger(const Trajectory& traj, const SlopeFn& slope) {
  DeGiorgiLedger L;
  const double tau = traj.tau;
  for (int n = 1; n <= traj.steps(); ++n) {
    const LedgerRow& r = traj.ledger[n];
    double s = r.slope;
    if (!std::isfinite(s)) {
      if (!slope) throw std::invalid_argument("dissipation_ledger: no slope available");
      s = slope(traj.states[n]);
    }
    const double diss = 0.5 * tau * (r.step_dist / tau) * (r.step_dist / tau);
    const double sl = 0.5 * tau * s * s;
    L.dissipation.push_back(diss);
    L.slope_term.push_back(sl);
    L.dissipation_total += diss;
    L.slope_total += sl;
    const double excess = r.energy + r.step_dist * r.step_dist / (2.0 * tau) - traj.ledger[n - 1].energy;
    L.worst_step_excess = n == 1 ? excess : std::max(L.worst_step_excess, excess);
  }
  L.energy_change = traj.ledger.back().energy - traj.ledger.front().energy;
  L.residual = L.dissipation_total + L.slope_total + L.energy_change;
  return L;
}

}  // namespace vkr
