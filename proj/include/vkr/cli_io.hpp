#pragma once

#include "vkr/convergence_lab.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vkr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  ProblemSetup setup;
  double tau = 0.01;
  double T = 1.0;
  Exec exec = Exec::Parallel;
  std::string output_dir = "out";

  // study parameters
  double eps = 0.1;  // plate thickness for single 2D runs
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  std::vector<double> tau_list{0.08, 0.04, 0.02, 0.01};
  Polynomial w_perturbation;
  int random_states = 0;

  std::string source;                                        // path or "<string>"
  std::string config_bytes;                                  // exactly as read
  std::vector<std::pair<std::string, std::string>> entries;  // section.key -> raw value, file order
};

Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario(const std::string& path);

std::string sha256_hex(const std::string& bytes);
std::string version_string();

// Flat key=value manifest, keys kept in insertion order.
class RunManifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void add_output(const std::string& file) { outputs_.push_back(file); }
  const std::vector<std::string>& outputs() const { return outputs_; }
  std::string text() const;
  const std::string* find(const std::string& key) const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
  std::vector<std::string> outputs_;
};
RunManifest make_manifest(const Scenario& sc, const std::string& command);

// Write to a temporary sibling and rename over the target.
void atomic_write(const std::string& path, const std::string& content);

std::string ledger_csv(const Trajectory& traj);
constexpr const char* kLedgerHeader = "n,t,energy,step_dist,slope,phi_residual,newton_iters";

// Text snapshot: header lines then one line of DOFs per state, 17 significant digits.
std::string snapshot_text(const Trajectory& traj, const std::string& model);
Trajectory parse_snapshot(const std::string& text, std::string* model = nullptr);
void write_snapshot(const std::string& path, const Trajectory& traj, const std::string& model);
Trajectory read_snapshot(const std::string& path, std::string* model = nullptr);

std::string read_file(const std::string& path);
std::string format_double(double v);

}  // namespace vkr
