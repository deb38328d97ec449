#include "vkr/convergence_lab.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace vkr {

RibbonModel make_ribbon(const ProblemSetup& s) {
  return RibbonModel(Mesh1D(s.length, s.n1d), s.material, s.bc, s.forces, s.spaces);
}

PlateModel make_plate(const ProblemSetup& s, double eps) {
  return PlateModel(Mesh2D(s.length, s.nx, s.ny), s.material, s.bc, s.forces, eps);
}

std::vector<StudyEntry> StudyReport::select(const std::string& table, const std::string& quantity) const {
  std::vector<StudyEntry> out;
  for (const auto& e : entries)
    if (e.table == table && e.quantity == quantity) out.push_back(e);
  return out;
}

double StudyReport::value(const std::string& table, const std::string& quantity, double param, double param2,
                          double t) const {
  const double* found = nullptr;
  for (const auto& e : entries) {
    if (e.table != table || e.quantity != quantity) continue;
    if (e.param != param || e.param2 != param2 || std::abs(e.t - t) > 1e-12 * (1.0 + std::abs(t))) continue;
    if (found) throw std::logic_error("report: ambiguous entry " + table + "/" + quantity);
    found = &e.value;
  }
  if (!found) throw std::out_of_range("report: no entry " + table + "/" + quantity);
  return *found;
}

double StudyReport::max_of(const std::string& quantity) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    if (e.quantity == quantity) m = std::max(m, e.value);
  return m;
}

void StudyReport::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << kCsvHeader << '\n' << std::setprecision(17);
  for (const auto& e : entries)
    os << study << ',' << e.table << ',' << e.param << ',' << e.param2 << ',' << e.t << ',' << e.quantity << ','
       << e.value << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

double fit_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw std::invalid_argument("fit_order: need at least two points");
  const std::size_t k = std::min<std::size_t>(3, h.size()), first = h.size() - k;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(k);
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> sample_times(double T) { return {0.1 * T, 0.25 * T, 0.5 * T, T}; }

ProjectionDiag projection_diag(const PlateModel& plate, const Vec& u, int samples) {
  ProjectionDiag d;
  using G = boost::math::quadrature::gauss<double, 6>;
  const double a = plate.mesh().x.left(), l = plate.mesh().x.length;
  for (int i = 0; i < samples; ++i) {
    const double x1 = a + l * i / (samples - 1);
    double g = 0, e12 = 0, e22 = 0;
    const auto& absc = G::abscissa();
    const auto& wts = G::weights();
    for (std::size_t k = 0; k < absc.size(); ++k)
      for (double sign : {-1.0, 1.0}) {
        if (k == 0 && sign < 0 && absc[0] == 0.0) continue;
        const ScaledOps s = plate.scaled_operators(u, x1, 0.5 * sign * absc[k]);
        const double w = 0.5 * wts[k];
        g += w * s.hess[2];
        e12 += w * s.E[1];
        e22 += w * s.E[2];
      }
    d.x1.push_back(x1);
    d.gamma_avg.push_back(g);
    d.e12_avg.push_back(e12);
    d.e22_avg.push_back(e22);
  }
  for (int e = 0; e < plate.element_count(); ++e)
    for (int q = 0; q < plate.quad_count(); ++q) {
      const Eigen::Vector2d x = plate.quad_point(e, q);
      const ScaledOps s = plate.scaled_operators(u, x[0], x[1]);
      const double w = plate.quad_weight(e, q);
      d.gamma_l2 += w * s.hess[2] * s.hess[2];
      d.e12_l2 += w * s.E[1] * s.E[1];
      d.e22_l2 += w * s.E[2] * s.E[2];
    }
  d.gamma_l2 = std::sqrt(d.gamma_l2);
  d.e12_l2 = std::sqrt(d.e12_l2);
  d.e22_l2 = std::sqrt(d.e22_l2);
  return d;
}

namespace {

template <class Model>
CheckedRun checked_run(const Model& m, const Vec& u0, double tau, double T, const SolverOptions& opts, SlopeFn slope) {
  CheckedRun out;
  RunHooks hooks;
  hooks.slope = std::move(slope);
  hooks.residual = [&m](const Vec& p, const Vec& n, double t) { return m.weak_residual(p, n, t); };
  hooks.on_step = [&](int, const Vec& p, const Vec& n) {
    const Vec r = m.weak_residual_vector(p, n, tau), g = m.incremental_gradient(p, n, tau);
    out.max_gradient_mismatch = std::max(out.max_gradient_mismatch, (r - g).cwiseAbs().maxCoeff());
  };
  out.traj = run_trajectory(m, u0, tau, T, opts, hooks);
  for (int n = 1; n <= out.traj.steps(); ++n) {
    const LedgerRow& r = out.traj.ledger[n];
    const double prev = out.traj.ledger[n - 1].energy;
    const double excess = r.energy + r.step_dist * r.step_dist / (2.0 * tau) - prev;
    out.worst_step_excess = n == 1 ? excess : std::max(out.worst_step_excess, excess);
    out.max_residual_ratio = std::max(out.max_residual_ratio, r.phi_residual / (opts.tol * (1.0 + std::abs(prev))));
  }
  return out;
}

void record_run(StudyReport& rep, const std::string& table, double p1, double p2, const CheckedRun& r) {
  rep.add(table, p1, p2, 0.0, "worst_step_excess", r.worst_step_excess);
  rep.add(table, p1, p2, 0.0, "max_residual_ratio", r.max_residual_ratio);
  rep.add(table, p1, p2, 0.0, "max_gradient_mismatch", r.max_gradient_mismatch);
}

Hypothesis require_reducible(const MaterialPair& m) {
  const Hypothesis h = classify_hypothesis(m);
  if (h == Hypothesis::None)
    throw HypothesisError(
        "material satisfies neither (H1) nor (H2); the plate-to-ribbon limit of the evolution is only available under "
        "one of them");
  return h;
}

}  // namespace

CheckedRun run_ribbon(const RibbonModel& m, const Vec& u0, double tau, double T, const SolverOptions& opts,
                      bool with_slope) {
  SlopeFn slope;
  if (with_slope) slope = [&m](const Vec& u) { return m.slope(u); };
  return checked_run(m, u0, tau, T, opts, slope);
}

CheckedRun run_plate(const PlateModel& m, const Vec& u0, double tau, double T, const SolverOptions& opts) {
  return checked_run(m, u0, tau, T, opts, {});
}

StudyReport tau_study(const RibbonModel& m, const Vec& u0, const std::vector<double>& taus, double T,
                      const SolverOptions& opts) {
  if (taus.empty()) throw std::invalid_argument("tau_study: empty tau list");
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (std::abs(taus[i] - 0.5 * taus[i - 1]) > 1e-12 * taus[i - 1])
      throw std::invalid_argument("tau_study: each tau must be half the previous one");
  StudyReport rep;
  rep.study = "tau";
  std::vector<Trajectory> runs;
  for (double tau : taus) {
    CheckedRun r = run_ribbon(m, u0, tau, T, opts, true);
    const DeGiorgiLedger L = dissipation_ledger(r.traj);
    record_run(rep, "run", tau, 0.0, r);
    rep.add("run", tau, 0.0, 0.0, "energy_T", r.traj.ledger.back().energy);
    rep.add("run", tau, 0.0, 0.0, "residual", L.residual);
    runs.push_back(std::move(r.traj));
  }
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    double sup = 0.0;
    for (double t : sample_times(T)) {
      const double d = m.dist(runs[i].state_at(t), runs[i + 1].state_at(t));
      rep.add("compare", taus[i], taus[i + 1], t, "dist", d);
      sup = std::max(sup, d);
    }
    rep.add("compare", taus[i], taus[i + 1], 0.0, "sup_dist", sup);
  }
  return rep;
}

StudyReport epsilon_study(const ProblemSetup& s, const std::vector<double>& eps, double tau, double T) {
  const Hypothesis h = require_reducible(s.material);
  if (eps.empty()) throw std::invalid_argument("epsilon_study: empty eps list");
  StudyReport rep;
  rep.study = "reduce";
  rep.add("setup", 0.0, 0.0, 0.0, h == Hypothesis::H1 ? "hypothesis_H1" : "hypothesis_H2", 1.0);
  const RibbonModel ribbon = make_ribbon(s);
  const Vec u0 = ribbon.interpolate(s.initial);
  const CheckedRun r1 = run_ribbon(ribbon, u0, tau, T, s.solver);
  record_run(rep, "run1d", tau, 0.0, r1);
  std::vector<double> times{0.0};
  for (double t : sample_times(T)) times.push_back(t);
  std::vector<double> finals;
  for (double e : eps) {
    const PlateModel plate = make_plate(s, e);
    const Vec y0 = build_recovery(plate, ribbon, u0, s.recovery);
    const CheckedRun r2 = run_plate(plate, y0, tau, T, s.solver);
    record_run(rep, "run2d", e, tau, r2);
    for (double t : times) {
      const Vec& Y = r2.traj.state_at(t);
      const Vec& U = r1.traj.state_at(t);
      const double d = std::sqrt(std::max(0.0, plate.projected_sqdist(Y, ribbon, U)));
      rep.add("distance", e, tau, t, "d0", d);
      rep.add("energy", e, tau, t, "phi_eps", plate.energy(Y));
      rep.add("energy", e, tau, t, "phi_0", ribbon.energy(U));
      const ProjectionDiag pd = projection_diag(plate, Y, 9);
      rep.add("diag", e, tau, t, "gamma_l2", pd.gamma_l2);
      rep.add("diag", e, tau, t, "e12_l2", pd.e12_l2);
      rep.add("diag", e, tau, t, "e22_l2", pd.e22_l2);
    }
    finals.push_back(rep.value("distance", "d0", e, tau, T));
  }
  if (eps.size() >= 2 && std::all_of(finals.begin(), finals.end(), [](double v) { return v > 0.0; }))
    rep.add("fit", tau, 0.0, T, "order_d0", fit_order(eps, finals));
  return rep;
}

StudyReport commutativity_report(const ProblemSetup& s, const std::vector<double>& eps, const std::vector<double>& taus,
                                 double T) {
  if (eps.empty() || taus.empty()) throw std::invalid_argument("commutativity_report: empty eps or tau list");
  require_reducible(s.material);
  StudyReport rep;
  rep.study = "commute";
  const RibbonModel ribbon = make_ribbon(s);
  const Vec u0 = ribbon.interpolate(s.initial);
  std::vector<Trajectory> one_d;
  for (double tau : taus) {
    CheckedRun r = run_ribbon(ribbon, u0, tau, T, s.solver);
    record_run(rep, "run1d", tau, 0.0, r);
    one_d.push_back(std::move(r.traj));
  }
  const std::size_t finest =
      static_cast<std::size_t>(std::min_element(taus.begin(), taus.end()) - taus.begin());
  for (std::size_t j = 0; j < taus.size(); ++j)
    for (double t : sample_times(T))
      rep.add("vertical", 0.0, taus[j], t, "d0", ribbon.dist(one_d[j].state_at(t), one_d[finest].state_at(t)));
  for (double e : eps) {
    const PlateModel plate = make_plate(s, e);
    const Vec y0 = build_recovery(plate, ribbon, u0, s.recovery);
    for (std::size_t j = 0; j < taus.size(); ++j) {
      const CheckedRun r2 = run_plate(plate, y0, taus[j], T, s.solver);
      record_run(rep, "run2d", e, taus[j], r2);
      for (double t : sample_times(T)) {
        const Vec& Y = r2.traj.state_at(t);
        rep.add("horizontal", e, taus[j], t, "d0",
                std::sqrt(std::max(0.0, plate.projected_sqdist(Y, ribbon, one_d[j].state_at(t)))));
        rep.add("diagonal", e, taus[j], t, "d0",
                std::sqrt(std::max(0.0, plate.projected_sqdist(Y, ribbon, one_d[finest].state_at(t)))));
      }
    }
  }
  return rep;
}

StudyReport gamma_check(const ProblemSetup& s, const std::vector<Vec>& targets, const std::vector<double>& eps) {
  StudyReport rep;
  rep.study = "gamma";
  const RibbonModel ribbon = make_ribbon(s);
  std::vector<std::vector<double>> errs(targets.size());
  for (double e : eps) {
    const PlateModel plate = make_plate(s, e);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const Vec y = build_recovery(plate, ribbon, targets[k], s.recovery);
      const double phi0 = ribbon.energy(targets[k]), phie = plate.energy(y);
      rep.add("energy", static_cast<double>(k), e, 0.0, "phi_eps", phie);
      rep.add("energy", static_cast<double>(k), e, 0.0, "phi_0", phi0);
      rep.add("error", static_cast<double>(k), e, 0.0, "abs_gap", std::abs(phie - phi0));
      errs[k].push_back(std::abs(phie - phi0));
    }
  }
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const bool positive = std::all_of(errs[k].begin(), errs[k].end(), [](double v) { return v > 0.0; });
    if (eps.size() >= 2 && positive) rep.add("fit", static_cast<double>(k), 0.0, 0.0, "order", fit_order(eps, errs[k]));
  }
  return rep;
}

GeodesicCalibration geodesic_convexity_check(const RibbonModel& m, const std::vector<Vec>& u0_pool,
                                             const std::vector<Vec>& u1_pool, int pairs, std::mt19937& rng) {
  if (u0_pool.empty() || u1_pool.empty()) throw std::invalid_argument("geodesic check: empty pool");
  GeodesicCalibration cal;
  std::vector<double> phi0(u0_pool.size()), phi1(u1_pool.size());
  for (std::size_t i = 0; i < u0_pool.size(); ++i) {
    phi0[i] = m.energy(u0_pool[i]);
    cal.M = std::max(cal.M, phi0[i]);
  }
  for (std::size_t j = 0; j < u1_pool.size(); ++j) phi1[j] = m.energy(u1_pool[j]);

  struct Sample {
    double s, t, ds, gap;
  };
  std::vector<Sample> samples;
  std::uniform_int_distribution<std::size_t> pick0(0, u0_pool.size() - 1), pick1(0, u1_pool.size() - 1);
  for (int k = 0; k < pairs; ++k) {
    const std::size_t i = pick0(rng), j = pick1(rng);
    const double t = m.dist(u0_pool[i], u1_pool[j]);
    for (int si = 1; si <= 9; ++si) {
      const double s = 0.1 * si;
      const Vec us = (1.0 - s) * u0_pool[i] + s * u1_pool[j];
      const double ds = m.dist(u0_pool[i], us);
      const double gap = m.energy(us) - (1.0 - s) * phi0[i] - s * phi1[j];
      samples.push_back({s, t, ds, gap});
      if (t > 0.0) cal.worst_metric_ratio = std::max(cal.worst_metric_ratio, ds / (s * t));
    }
  }
  cal.samples = static_cast<int>(samples.size());
  // relative roundoff allowance on both sides of each inequality
  const double slack = 1e-12;
  auto holds = [&](const Sample& x, double C) {
    if (x.t == 0.0) return x.gap <= slack * (1.0 + cal.M);
    const double t2 = x.t * x.t, t3 = t2 * x.t, t4 = t3 * x.t;
    const double lhs1 = x.ds * x.ds, rhs1 = x.s * x.s * (t2 + C * t3 + C * t4);
    const double rhs2 = x.s * (C * std::sqrt(cal.M) * t2 + C * t3 + C * t4);
    return lhs1 <= rhs1 + slack * (lhs1 + x.s * x.s * t2) && x.gap <= rhs2 + slack * (1.0 + cal.M);
  };
  auto all_hold = [&](double C) {
    return std::all_of(samples.begin(), samples.end(), [&](const Sample& x) { return holds(x, C); });
  };
  double lo = 0.0, hi = 1.0;
  if (all_hold(0.0)) {
    hi = 0.0;
  } else {
    while (!all_hold(hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw std::runtime_error("geodesic check: no finite constant found");
    }
    for (int it = 0; it < 80 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (all_hold(mid) ? hi : lo) = mid;
    }
  }
  cal.C = hi;
  const auto passed = std::count_if(samples.begin(), samples.end(), [&](const Sample& x) { return holds(x, cal.C); });
  cal.pass_rate = samples.empty() ? 1.0 : static_cast<double>(passed) / samples.size();
  return cal;
}

StudyReport slope_consistency(const RibbonModel& m, const Trajectory& traj) {
  StudyReport rep;
  rep.study = "slope";
  for (int n = 1; n <= traj.steps(); ++n) {
    const SlopeSolution sol = m.local_slope(traj.states[n]);
    const double rate = traj.ledger[n].step_dist / traj.tau;
    const double s2 = sol.slope * sol.slope, r2 = rate * rate;
    const double t = traj.ledger[n].t;
    rep.add("slope", n, traj.tau, t, "slope2", s2);
    rep.add("slope", n, traj.tau, t, "rate2", r2);
    rep.add("slope", n, traj.tau, t, "representation2", sol.representation * sol.representation);
    rep.add("slope", n, traj.tau, t, "ratio", r2 > 0.0 ? s2 / r2 : 0.0);
    rep.add("slope", n, traj.tau, t, "representation_gap",
            sol.slope > 0.0 ? std::abs(sol.representation - sol.slope) / sol.slope : std::abs(sol.representation));
  }
  return rep;
}

StudyReport decoupling_checks(const ProblemSetup& s, const DecouplingScenario& sc) {
  StudyReport rep;
  rep.study = "decouple";
  {
    const RibbonModel m(Mesh1D(s.length, s.n1d), s.material, {}, {}, s.spaces);
    RibbonInitial init;
    init.xi2 = sc.xi2;
    const Vec u0 = m.interpolate(init);
    const CheckedRun r = run_ribbon(m, u0, sc.tau, sc.T, s.solver);
    record_run(rep, "xi2_decay", sc.tau, 0.0, r);
    const double c0w = m.material().W0().C0, c0r = m.material().R0().C0;
    const double rho = 1.0 / (1.0 + sc.tau * c0w / c0r);
    double worst = 0.0;
    for (int n = 1; n <= r.traj.steps(); ++n) {
      const Vec a = m.field(r.traj.states[n - 1], RibbonField::Xi2), b = m.field(r.traj.states[n], RibbonField::Xi2);
      const double scale = a.cwiseAbs().maxCoeff();
      if (scale > 0.0) worst = std::max(worst, (b - rho * a).cwiseAbs().maxCoeff() / scale);
    }
    rep.add("xi2_decay", sc.tau, 0.0, 0.0, "factor", rho);
    rep.add("xi2_decay", sc.tau, 0.0, 0.0, "factor_error", worst);
    const Vec x0 = m.field(u0, RibbonField::Xi2), xT = m.field(r.traj.states.back(), RibbonField::Xi2);
    const Vec target = std::exp(-sc.T * c0w / c0r) * x0;
    rep.add("xi2_decay", sc.tau, 0.0, sc.T, "final_rel_dev", (xT - target).norm() / target.norm());
  }
  const RibbonModel m = make_ribbon(s);
  const Vec u_full = m.interpolate(sc.full);
  const CheckedRun full = run_ribbon(m, u_full, sc.tau, sc.T, s.solver);
  record_run(rep, "full", sc.tau, 0.0, full);
  {
    ProblemSetup only = s;
    only.forces.f = Polynomial();
    only.forces.g1 = Polynomial();
    const RibbonModel m2 = make_ribbon(only);
    RibbonInitial init;
    init.xi1 = s.bc.u1;
    init.xi2 = sc.full.xi2;
    init.w = s.bc.v;
    const CheckedRun r = run_ribbon(m2, m2.interpolate(init), sc.tau, sc.T, s.solver);
    record_run(rep, "xi2_only", sc.tau, 0.0, r);
    double gap = 0.0;
    for (int n = 0; n <= r.traj.steps(); ++n)
      gap = std::max(gap, (m.field(full.traj.states[n], RibbonField::Xi2) - m2.field(r.traj.states[n], RibbonField::Xi2))
                              .cwiseAbs()
                              .maxCoeff());
    rep.add("xi2_independent", sc.tau, 0.0, 0.0, "max_gap", gap);
  }
  if (classify_hypothesis(s.material) == Hypothesis::H1) {
    RibbonInitial perturbed = sc.full;
    perturbed.w = sc.full.w + sc.w_perturbation;
    const CheckedRun r = run_ribbon(m, m.interpolate(perturbed), sc.tau, sc.T, s.solver);
    record_run(rep, "perturbed", sc.tau, 0.0, r);
    double gap = 0.0, wgap = 0.0;
    for (int n = 0; n <= r.traj.steps(); ++n) {
      gap = std::max(gap, (m.field(full.traj.states[n], RibbonField::Theta) - m.field(r.traj.states[n], RibbonField::Theta))
                              .cwiseAbs()
                              .maxCoeff());
      wgap = std::max(wgap, (m.field(full.traj.states[n], RibbonField::W) - m.field(r.traj.states[n], RibbonField::W))
                                .cwiseAbs()
                                .maxCoeff());
    }
    rep.add("theta_independent", sc.tau, 0.0, 0.0, "max_gap", gap);
    rep.add("theta_independent", sc.tau, 0.0, 0.0, "w_gap", wgap);
  } else {
    rep.add("theta_independent", sc.tau, 0.0, 0.0, "skipped_not_h1", 1.0);
  }
  return rep;
}

}  // namespace vkr
