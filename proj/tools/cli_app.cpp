#include "cli_app.hpp"

#include "vkr/cli_io.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

namespace vkr::cli {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"simulate-1d",  "simulate-2d", "tau-study",      "reduce-study", "commute-study",
                                          "gamma-check", "slope-check", "decouple-check", "report"};
  return s;
}

std::string usage() {
  std::ostringstream os;
  os << "usage: vkr <subcommand> <scenario.ini> [--out DIR] [--seed N] [--quiet]\n"
     << "       vkr report <study.csv> [--quiet]\n"
     << "subcommands:";
  for (const auto& s : subcommands()) os << ' ' << s;
  os << '\n';
  return os.str();
}

namespace {

struct Options {
  std::string command;
  std::string input;
  std::string out;
  unsigned seed = 0;
  bool quiet = false;
};

// Collects outputs, writes the manifest before any result file.
class Session {
 public:
  Session(const Scenario& sc, const Options& opt, const std::vector<std::string>& files)
      : dir_(opt.out.empty() ? sc.output_dir : opt.out), manifest_(make_manifest(sc, opt.command)) {
    fs::create_directories(dir_);
    manifest_.set("seed", std::to_string(opt.seed));
    for (const auto& f : files) manifest_.add_output(f);
    atomic_write(path("manifest.txt"), manifest_.text());
    start_ = std::chrono::steady_clock::now();
  }
  std::string path(const std::string& file) const { return (fs::path(dir_) / file).string(); }
  void write(const std::string& file, const std::string& content) {
    const auto& outs = manifest_.outputs();
    if (std::find(outs.begin(), outs.end(), file) == outs.end()) throw std::logic_error("unlisted output " + file);
    atomic_write(path(file), content);
  }
  void write_report(const std::string& file, const StudyReport& r) {
    const std::string tmp = path(file) + ".partial";
    r.write_csv(tmp);
    const std::string body = read_file(tmp);
    fs::remove(tmp);
    write(file, body);
  }
  void finish(const std::string& status) {
    manifest_.set("status", status);
    manifest_.set("wall_clock.seconds",
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
    atomic_write(path("manifest.txt"), manifest_.text());
  }
  RunManifest& manifest() { return manifest_; }

 private:
  std::string dir_;
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

void summary_line(std::ostream& out, const Options& opt, const std::string& text) {
  if (!opt.quiet) out << opt.command << ": " << text << '\n';
}

int cmd_simulate_1d(const Scenario& sc, const Options& opt, std::ostream& out) {
  Session s(sc, opt, {"ledger_1d.csv", "snapshot_1d.txt"});
  const RibbonModel m = make_ribbon(sc.setup);
  const CheckedRun r = run_ribbon(m, m.interpolate(sc.setup.initial), sc.tau, sc.T, sc.setup.solver, true);
  s.write("ledger_1d.csv", ledger_csv(r.traj));
  s.write("snapshot_1d.txt", snapshot_text(r.traj, "ribbon"));
  const DeGiorgiLedger L = dissipation_ledger(r.traj);
  s.manifest().set("result.steps", std::to_string(r.traj.steps()));
  s.manifest().set("result.energy_final", r.traj.ledger.back().energy);
  s.manifest().set("result.de_giorgi_residual", L.residual);
  s.manifest().set("result.worst_step_excess", r.worst_step_excess);
  s.finish("ok");
  summary_line(out, opt,
               std::to_string(r.traj.steps()) + " steps, energy " + format_double(r.traj.ledger.back().energy) +
                   ", residual " + format_double(L.residual));
  return kOk;
}

int cmd_simulate_2d(const Scenario& sc, const Options& opt, std::ostream& out) {
  Session s(sc, opt, {"ledger_2d.csv", "snapshot_2d.txt"});
  const RibbonModel ribbon = make_ribbon(sc.setup);
  const PlateModel plate = make_plate(sc.setup, sc.eps);
  const Vec y0 = build_recovery(plate, ribbon, ribbon.interpolate(sc.setup.initial), sc.setup.recovery);
  const CheckedRun r = run_plate(plate, y0, sc.tau, sc.T, sc.setup.solver);
  s.write("ledger_2d.csv", ledger_csv(r.traj));
  s.write("snapshot_2d.txt", snapshot_text(r.traj, "plate"));
  s.manifest().set("result.eps", sc.eps);
  s.manifest().set("result.steps", std::to_string(r.traj.steps()));
  s.manifest().set("result.energy_final", r.traj.ledger.back().energy);
  s.manifest().set("result.worst_step_excess", r.worst_step_excess);
  s.finish("ok");
  summary_line(out, opt,
               std::to_string(r.traj.steps()) + " steps at eps " + format_double(sc.eps) + ", energy " +
                   format_double(r.traj.ledger.back().energy));
  return kOk;
}

int cmd_study(const Scenario& sc, const Options& opt, std::ostream& out, const std::string& file,
              const std::function<StudyReport()>& fn) {
  Session s(sc, opt, {file});
  const StudyReport r = fn();
  s.write_report(file, r);
  s.finish("ok");
  summary_line(out, opt, std::to_string(r.entries.size()) + " entries written to " + s.path(file));
  return kOk;
}

StudyReport slope_check(const Scenario& sc, unsigned seed) {
  const RibbonModel m = make_ribbon(sc.setup);
  const Vec u0 = m.interpolate(sc.setup.initial);
  const CheckedRun r = run_ribbon(m, u0, sc.tau, sc.T, sc.setup.solver);
  StudyReport rep = slope_consistency(m, r.traj);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int k = 0; k < sc.random_states; ++k) {
    Vec v = u0;
    for (int i = 0; i < v.size(); ++i)
      if (!m.constrained()[i]) v[i] += u(rng);
    const SlopeSolution sol = m.local_slope(v);
    rep.add("random", k, 0.0, 0.0, "representation_gap",
            sol.slope > 0.0 ? std::abs(sol.representation - sol.slope) / sol.slope : sol.representation);
    rep.add("random", k, 0.0, 0.0, "orthogonality_ratio", sol.L_norm > 0.0 ? sol.orthogonality / sol.L_norm : 0.0);
  }
  return rep;
}

StudyReport gamma_from_scenario(const Scenario& sc) {
  const RibbonModel m = make_ribbon(sc.setup);
  std::vector<Vec> targets{m.interpolate(sc.setup.initial)};
  const BoundaryData& bc = sc.setup.bc;
  if (bc.u1.is_zero() && bc.u2.is_zero() && bc.v.is_zero() && !sc.setup.initial.theta.is_zero()) {
    RibbonInitial twist;
    twist.theta = sc.setup.initial.theta;
    targets.push_back(m.interpolate(twist));
  }
  return gamma_check(sc.setup, targets, sc.eps_list);
}

int cmd_report(const Options& opt, std::ostream& out) {
  std::istringstream is(read_file(opt.input));
  std::string line;
  std::getline(is, line);
  if (line != StudyReport::kCsvHeader) throw std::runtime_error(opt.input + ": not a study CSV");
  StudyReport r;
  while (std::getline(is, line)) {
    std::stringstream ls(line);
    std::string f[7];
    for (auto& x : f) std::getline(ls, x, ',');
    r.study = f[0];
    r.add(f[1], std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), f[5], std::stod(f[6]));
  }
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& e : r.entries) groups[{e.table, e.quantity}].push_back(e.value);
  if (opt.quiet) return kOk;
  out << "study " << r.study << ", " << r.entries.size() << " entries\n";
  for (const auto& [k, v] : groups)
    out << "  " << k.first << '/' << k.second << ": n=" << v.size() << " min=" << format_double(*std::min_element(v.begin(), v.end()))
        << " max=" << format_double(*std::max_element(v.begin(), v.end())) << '\n';
  // fits recomputed from the raw rows
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> gamma;
  for (const auto& e : r.select("error", "abs_gap")) {
    gamma[e.param].first.push_back(e.param2);
    gamma[e.param].second.push_back(e.value);
  }
  for (const auto& [k, xy] : gamma)
    if (xy.first.size() >= 2) out << "  refit error/abs_gap target " << k << ": order " << format_double(fit_order(xy.first, xy.second)) << '\n';
  double tmax = 0.0;
  for (const auto& e : r.select("distance", "d0")) tmax = std::max(tmax, e.t);
  std::vector<double> h, d;
  for (const auto& e : r.select("distance", "d0"))
    if (e.t == tmax) {
      h.push_back(e.param);
      d.push_back(e.value);
    }
  if (h.size() >= 2) out << "  refit distance/d0 at t=" << tmax << ": order " << format_double(fit_order(h, d)) << '\n';
  return kOk;
}

int dispatch(const Options& opt, std::ostream& out) {
  if (opt.command == "report") return cmd_report(opt, out);
  const Scenario sc = load_scenario(opt.input);
  set_default_exec(sc.exec);
  if (opt.command == "simulate-1d") return cmd_simulate_1d(sc, opt, out);
  if (opt.command == "simulate-2d") return cmd_simulate_2d(sc, opt, out);
  if (opt.command == "tau-study")
    return cmd_study(sc, opt, out, "tau_study.csv", [&] {
      const RibbonModel m = make_ribbon(sc.setup);
      return tau_study(m, m.interpolate(sc.setup.initial), sc.tau_list, sc.T, sc.setup.solver);
    });
  if (opt.command == "reduce-study") {
    if (classify_hypothesis(sc.setup.material) == Hypothesis::None)
      throw HypothesisError("reduce-study needs a material satisfying (H1) or (H2); this one satisfies neither");
    return cmd_study(sc, opt, out, "reduce_study.csv", [&] { return epsilon_study(sc.setup, sc.eps_list, sc.tau, sc.T); });
  }
  if (opt.command == "commute-study") {
    if (classify_hypothesis(sc.setup.material) == Hypothesis::None)
      throw HypothesisError("commute-study needs a material satisfying (H1) or (H2); this one satisfies neither");
    return cmd_study(sc, opt, out, "commute_study.csv",
                     [&] { return commutativity_report(sc.setup, sc.eps_list, sc.tau_list, sc.T); });
  }
  if (opt.command == "gamma-check")
    return cmd_study(sc, opt, out, "gamma_check.csv", [&] { return gamma_from_scenario(sc); });
  if (opt.command == "slope-check")
    return cmd_study(sc, opt, out, "slope_check.csv", [&] { return slope_check(sc, opt.seed); });
  if (opt.command == "decouple-check")
    return cmd_study(sc, opt, out, "decouple_check.csv", [&] {
      DecouplingScenario d;
      d.tau = sc.tau;
      d.T = sc.T;
      d.xi2 = sc.setup.initial.xi2.is_zero() ? Polynomial({0.0625, 0.0, -0.5, 0.0, 1.0}) : sc.setup.initial.xi2;
      d.full = sc.setup.initial;
      d.w_perturbation = sc.w_perturbation;
      return decoupling_checks(sc.setup, d);
    });
  throw std::logic_error("unhandled subcommand " + opt.command);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || std::find(subcommands().begin(), subcommands().end(), args[0]) == subcommands().end()) {
    if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
      out << usage();
      return kOk;
    }
    err << (args.empty() ? std::string("missing subcommand") : "unknown subcommand '" + args[0] + "'") << '\n'
        << usage();
    return kUsage;
  }
  Options opt;
  opt.command = args[0];
  CLI::App app{"vkr " + opt.command};
  app.add_option("input", opt.input, opt.command == "report" ? "study CSV" : "scenario file")->required();
  app.add_option("--out", opt.out, "output directory (default: [output] dir)");
  app.add_option("--seed", opt.seed, "seed for random-state checks");
  app.add_flag("--quiet", opt.quiet, "suppress the summary line");
  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << usage();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << opt.command << ": " << e.what() << '\n' << usage();
    return kUsage;
  }
  try {
    return dispatch(opt, out);
  } catch (const HypothesisError& e) {
    err << opt.command << ": " << e.what() << '\n';
    return kHypothesis;
  } catch (const SolverFailure& e) {
    err << opt.command << ": solver failed at step " << e.step() << ": " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << opt.command << ": " << e.what() << '\n';
    return kError;
  }
}

}  // namespace vkr::cli
