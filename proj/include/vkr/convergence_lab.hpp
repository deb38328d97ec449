#pragma once

#include "vkr/minimizing_movements.hpp"
#include "vkr/plate.hpp"
#include "vkr/ribbon.hpp"

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vkr {

// Everything needed to build the 1D and 2D models of one scenario.
struct ProblemSetup {
  MaterialPair material;
  BoundaryData bc;
  RibbonForces forces;
  RibbonInitial initial;
  double length = 1.0;
  int n1d = 64;
  int nx = 64;
  int ny = 8;
  RibbonSpaces spaces;
  SolverOptions solver;
  RecoveryOptions recovery;
};

RibbonModel make_ribbon(const ProblemSetup& s);
PlateModel make_plate(const ProblemSetup& s, double eps);

// Raised by studies that need (H1) or (H2).
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One long-format record: (study, table, param, param2, t) -> quantity = value.
struct StudyEntry {
  std::string table;
  double param = 0.0;
  double param2 = 0.0;
  double t = 0.0;
  std::string quantity;
  double value = 0.0;
};

struct StudyReport {
  std::string study;
  std::vector<StudyEntry> entries;

  void add(const std::string& table, double param, double param2, double t, const std::string& quantity, double value) {
    entries.push_back({table, param, param2, t, quantity, value});
  }
  std::vector<StudyEntry> select(const std::string& table, const std::string& quantity) const;
  // Single value or throws when absent / ambiguous.
  double value(const std::string& table, const std::string& quantity, double param, double param2 = 0.0,
               double t = 0.0) const;
  double max_of(const std::string& quantity) const;
  void write_csv(const std::string& path) const;
  static constexpr const char* kCsvHeader = "study,table,param,param2,t,quantity,value";
};

// Least-squares slope of log(err) vs log(h) over the last three points.
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

// Sample times used by trajectory comparisons, as fractions of T.
std::vector<double> sample_times(double T);

// Fields of the scaled plate state that the ribbon limit does not see.
struct ProjectionDiag {
  std::vector<double> x1;
  std::vector<double> gamma_avg, e12_avg, e22_avg;  // x2-averages at x1
  double gamma_l2 = 0.0, e12_l2 = 0.0, e22_l2 = 0.0;
};
ProjectionDiag projection_diag(const PlateModel& plate, const Vec& u, int samples = 33);

// A run together with the checks every acceptance run records.
struct CheckedRun {
  Trajectory traj;
  double worst_step_excess = 0.0;
  double max_residual_ratio = 0.0;  // weak residual / (tol (1 + |phi(U^{n-1})|))
  double max_gradient_mismatch = 0.0;  // |weak residual vector - incremental gradient| (inf norm)
};
CheckedRun run_ribbon(const RibbonModel& m, const Vec& u0, double tau, double T, const SolverOptions& opts,
                      bool with_slope = false);
CheckedRun run_plate(const PlateModel& m, const Vec& u0, double tau, double T, const SolverOptions& opts);

StudyReport tau_study(const RibbonModel& m, const Vec& u0, const std::vector<double>& taus, double T,
                      const SolverOptions& opts);
StudyReport epsilon_study(const ProblemSetup& s, const std::vector<double>& eps, double tau, double T);
StudyReport commutativity_report(const ProblemSetup& s, const std::vector<double>& eps, const std::vector<double>& taus,
                                 double T);
StudyReport gamma_check(const ProblemSetup& s, const std::vector<Vec>& targets, const std::vector<double>& eps);

struct GeodesicCalibration {
  double C = 0.0;
  double M = 0.0;
  double pass_rate = 0.0;
  int samples = 0;
  double worst_metric_ratio = 0.0;  // max D(u0,us) / (s D(u0,u1))
};
// Pairs are drawn uniformly from the two pools; s in {0.1, ..., 0.9}.
GeodesicCalibration geodesic_convexity_check(const RibbonModel& m, const std::vector<Vec>& u0_pool,
                                             const std::vector<Vec>& u1_pool, int pairs, std::mt19937& rng);

StudyReport slope_consistency(const RibbonModel& m, const Trajectory& traj);

struct DecouplingScenario {
  double tau = 0.01;
  double T = 1.0;
  Polynomial xi2;             // in-plane deflection for check (a)
  RibbonInitial full;         // all fields, for (b) and the xi2 cross-check
  Polynomial w_perturbation;  // added to full.w for (b)
};
StudyReport decoupling_checks(const ProblemSetup& s, const DecouplingScenario& sc);

}  // namespace vkr
