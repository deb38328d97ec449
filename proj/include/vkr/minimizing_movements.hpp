#pragma once

#include "vkr/gradient_system.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace vkr {

struct SolverOptions {
  double tol = 1e-10;  // on the diagonally scaled gradient, relative to 1 + |phi(u_prev)|
  int max_newton = 50;
  double armijo = 1e-4;
  int max_backtracks = 60;
  bool gradient_fallback = true;
};

struct StepReport {
  int iterations = 0;
  int fallbacks = 0;
  double grad_norm = 0.0;
  double tol = 0.0;
  double objective = 0.0;
  bool converged = false;
};

struct StepResult {
  Vec u;
  StepReport report;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// argmin_v (1/2tau) D(u_prev, v)^2 + phi(v), warm-started at u_prev.
StepResult incremental_step(const GradientSystem& sys, double tau, const Vec& u_prev, const SolverOptions& opts);

struct LedgerRow {
  int n = 0;
  double t = 0.0;
  double energy = 0.0;
  double step_dist = 0.0;
  double slope = 0.0;
  double phi_residual = 0.0;
  int newton_iters = 0;
};

struct Trajectory {
  double tau = 0.0;
  double T = 0.0;
  std::vector<Vec> states;
  std::vector<LedgerRow> ledger;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  // Piecewise constant: U^0 at t = 0, U^n on ((n-1) tau, n tau].
  const Vec& state_at(double t) const;
};

using SlopeFn = std::function<double(const Vec&)>;
using ResidualFn = std::function<double(const Vec& prev, const Vec& next, double tau)>;
// Called after each accepted step with (n, prev, next); may throw to abort.
using StepHook = std::function<void(int, const Vec&, const Vec&)>;

struct RunHooks {
  SlopeFn slope;
  ResidualFn residual;
  StepHook on_step;
};

Trajectory run_trajectory(const GradientSystem& sys, const Vec& u0, double tau, double T, const SolverOptions& opts,
                          const RunHooks& hooks = {});

struct DeGiorgiLedger {
  std::vector<double> dissipation;  // 1/2 tau (D_n / tau)^2 per step
  std::vector<double> slope_term;   // 1/2 tau slope(U^n)^2 per step
  double dissipation_total = 0.0;
  double slope_total = 0.0;
  double energy_change = 0.0;  // phi(U^N) - phi(U^0)
  double residual = 0.0;       // R(tau)
  double worst_step_excess = 0.0;  // max_n phi(U^n) + D^2/2tau - phi(U^{n-1})
};

// Uses ledger slopes when finite, otherwise evaluates `slope`.
DeGiorgiLedger dissipation_ledger(const Trajectory& traj, const SlopeFn& slope = {});

}  // namespace vkr
