#include "vkr/cli_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unistd.h>

#ifndef VKR_VERSION
#define VKR_VERSION "0.0.0"
#endif

namespace vkr {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"material", {"model", "mu_W", "lambda_W", "mu_R", "lambda_R", "CW", "CR", "h2_family"}},
      {"geometry", {"length"}},
      {"mesh", {"n1d", "nx", "ny", "xi1_kind", "theta_kind"}},
      {"time", {"tau", "T"}},
      {"solver", {"tol", "max_newton", "armijo", "max_backtracks", "gradient_fallback", "exec"}},
      {"boundary", {"u1", "u2", "v"}},
      {"forces", {"f", "g1", "g2"}},
      {"initial", {"xi1", "xi2", "w", "theta"}},
      {"output", {"dir"}},
      {"study", {"eps", "eps_list", "tau_list", "w_perturbation", "random_states", "cutoff_width",
                 "cutoff_scales_with_eps"}},
  };
  return k;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  Reader(const pt::ptree& tree, const std::string& origin) : tree_(tree), origin_(origin) {}

  const std::string* raw(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  void load(std::vector<std::pair<std::string, std::string>>& entries) {
    for (const auto& [section, body] : tree_) {
      auto sec = known_keys().find(section);
      if (body.empty() && !body.data().empty()) fail(section, "key outside of any section");
      if (sec == known_keys().end()) fail(section, "unknown section");
      for (const auto& [key, node] : body) {
        const std::string path = section + "." + key;
        if (!sec->second.count(key)) fail(path, "unknown key");
        if (!node.empty()) fail(path, "nested value not allowed");
        values_[path] = trim(node.data());
        entries.emplace_back(path, values_[path]);
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(origin_ + ": " + key + ": " + msg);
  }

  double number(const std::string& key, double def) const {
    const std::string* v = raw(key);
    return v ? parse_number(key, *v) : def;
  }

  int integer(const std::string& key, int def) const {
    const std::string* v = raw(key);
    if (!v) return def;
    std::size_t pos = 0;
    int out = 0;
    try {
      out = std::stoi(*v, &pos);
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + *v + "'");
    }
    if (pos != v->size()) fail(key, "expected an integer, got '" + *v + "'");
    return out;
  }

  bool boolean(const std::string& key, bool def) const {
    const std::string* v = raw(key);
    if (!v) return def;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(key, "expected true or false, got '" + *v + "'");
  }

  std::string text(const std::string& key, const std::string& def) const {
    const std::string* v = raw(key);
    return v ? *v : def;
  }

  std::vector<double> list(const std::string& key, std::vector<double> def) const {
    const std::string* v = raw(key);
    if (!v) return def;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  Polynomial poly(const std::string& key) const { return raw(key) ? Polynomial(list(key, {})) : Polynomial(); }

 private:
  double parse_number(const std::string& key, const std::string& s) const {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(s, &pos);
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(out)) fail(key, "expected a finite number, got '" + s + "'");
    return out;
  }

  const pt::ptree& tree_;
  std::string origin_;
  std::map<std::string, std::string> values_;
};

QuadForm2 read_form(const Reader& r, const std::string& model, const std::string& side) {
  if (model == "isotropic") {
    const std::string mk = "material.mu_" + side, lk = "material.lambda_" + side;
    const double mu = r.number(mk, 1.0), lambda = r.number(lk, 0.0);
    if (!(mu > 0.0)) r.fail(mk, "must be positive");
    if (!(mu + lambda > 0.0)) r.fail(lk, "mu + lambda must be positive for a positive definite form");
    return make_isotropic(mu, lambda);
  }
  const std::string key = "material.C" + side;
  const std::vector<double> c = r.list(key, {});
  if (c.size() != 9) r.fail(key, "expected 9 comma-separated entries (row-major 3x3)");
  Eigen::Matrix3d C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) C(i, j) = c[3 * i + j];
  if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * C.cwiseAbs().maxCoeff()) r.fail(key, "matrix is not symmetric");
  if (!is_spd(C)) r.fail(key, "matrix is not positive definite");
  return make_matrix_form(C);
}

Kind1D read_kind(const Reader& r, const std::string& key, Kind1D def, std::initializer_list<Kind1D> allowed) {
  const std::string* v = r.raw(key);
  if (!v) return def;
  Kind1D k;
  if (*v == "P1") k = Kind1D::P1;
  else if (*v == "P2") k = Kind1D::P2;
  else if (*v == "H3") k = Kind1D::Hermite3;
  else r.fail(key, "expected P1, P2 or H3, got '" + *v + "'");
  for (Kind1D a : allowed)
    if (a == k) return k;
  r.fail(key, "element kind '" + *v + "' not supported for this field");
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario sc;
  sc.source = origin;
  sc.config_bytes = text;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  Reader r(tree, origin);
  r.load(sc.entries);

  ProblemSetup& s = sc.setup;
  const std::string model = r.text("material.model", "isotropic");
  if (model != "isotropic" && model != "matrix") r.fail("material.model", "expected isotropic or matrix");
  for (const char* k : {"mu_W", "lambda_W", "mu_R", "lambda_R"})
    if (model == "matrix" && r.raw(std::string("material.") + k))
      r.fail(std::string("material.") + k, "only valid with model = isotropic");
  for (const char* k : {"CW", "CR"})
    if (model == "isotropic" && r.raw(std::string("material.") + k))
      r.fail(std::string("material.") + k, "only valid with model = matrix");
  s.material.W = read_form(r, model, "W");
  s.material.R = read_form(r, model, "R");
  s.material.vanishing_transverse = r.boolean("material.h2_family", false);

  s.length = r.number("geometry.length", 1.0);
  if (!(s.length > 0.0)) r.fail("geometry.length", "must be positive");
  s.n1d = r.integer("mesh.n1d", 64);
  s.nx = r.integer("mesh.nx", 64);
  s.ny = r.integer("mesh.ny", 8);
  for (const char* k : {"mesh.n1d", "mesh.nx", "mesh.ny"})
    if (r.integer(k, 1) < 1) r.fail(k, "must be at least 1");
  s.spaces.xi1 = read_kind(r, "mesh.xi1_kind", Kind1D::P2, {Kind1D::P1, Kind1D::P2});
  s.spaces.theta = read_kind(r, "mesh.theta_kind", Kind1D::Hermite3, {Kind1D::P1, Kind1D::Hermite3});

  sc.tau = r.number("time.tau", 0.01);
  sc.T = r.number("time.T", 1.0);
  if (!(sc.tau > 0.0)) r.fail("time.tau", "must be positive");
  if (!(sc.T > 0.0)) r.fail("time.T", "must be positive");

  s.solver.tol = r.number("solver.tol", 1e-10);
  s.solver.max_newton = r.integer("solver.max_newton", 50);
  s.solver.armijo = r.number("solver.armijo", 1e-4);
  s.solver.max_backtracks = r.integer("solver.max_backtracks", 60);
  s.solver.gradient_fallback = r.boolean("solver.gradient_fallback", true);
  if (!(s.solver.tol > 0.0)) r.fail("solver.tol", "must be positive");
  if (s.solver.max_newton < 1) r.fail("solver.max_newton", "must be at least 1");
  if (!(s.solver.armijo > 0.0 && s.solver.armijo < 0.5)) r.fail("solver.armijo", "must lie in (0, 1/2)");
  const std::string ex = r.text("solver.exec", "parallel");
  if (ex == "parallel") sc.exec = Exec::Parallel;
  else if (ex == "serial") sc.exec = Exec::Serial;
  else r.fail("solver.exec", "expected parallel or serial");

  s.bc = {r.poly("boundary.u1"), r.poly("boundary.u2"), r.poly("boundary.v")};
  s.forces = {r.poly("forces.f"), r.poly("forces.g1"), r.poly("forces.g2")};
  s.initial = {r.poly("initial.xi1"), r.poly("initial.xi2"), r.poly("initial.w"), r.poly("initial.theta")};
  sc.output_dir = r.text("output.dir", "out");

  sc.eps = r.number("study.eps", 0.1);
  if (!(sc.eps > 0.0)) r.fail("study.eps", "must be positive");
  sc.eps_list = r.list("study.eps_list", sc.eps_list);
  sc.tau_list = r.list("study.tau_list", sc.tau_list);
  for (double v : sc.eps_list)
    if (!(v > 0.0)) r.fail("study.eps_list", "entries must be positive");
  for (double v : sc.tau_list)
    if (!(v > 0.0)) r.fail("study.tau_list", "entries must be positive");
  sc.w_perturbation = r.poly("study.w_perturbation");
  sc.random_states = r.integer("study.random_states", 0);
  s.recovery.cutoff_width = r.number("study.cutoff_width", 0.1);
  s.recovery.cutoff_scales_with_eps = r.boolean("study.cutoff_scales_with_eps", false);

  // initial data must satisfy the boundary data on the 1D mesh
  try {
    make_ribbon(s).interpolate(s.initial);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    std::string key = "initial";
    for (const char* f : {"xi1", "xi2", "w", "theta"})
      if (what.find(std::string("initial ") + f + " ") != std::string::npos) key = std::string("initial.") + f;
    r.fail(key, what);
  }
  return sc;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Scenario load_scenario(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError(path + ": file does not exist");
  return parse_scenario(read_file(path), path);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string version_string() { return std::string("vkr ") + VKR_VERSION; }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void RunManifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : items_)
    if (k == key) {
      v = value;
      return;
    }
  items_.emplace_back(key, value);
}

void RunManifest::set(const std::string& key, double value) { set(key, format_double(value)); }

const std::string* RunManifest::find(const std::string& key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return &v;
  return nullptr;
}

std::string RunManifest::text() const {
  std::ostringstream os;
  for (const auto& [k, v] : items_) os << k << '=' << v << '\n';
  for (std::size_t i = 0; i < outputs_.size(); ++i) os << "output." << i << '=' << outputs_[i] << '\n';
  return os.str();
}

RunManifest make_manifest(const Scenario& sc, const std::string& command) {
  RunManifest m;
  m.set("version", version_string());
  m.set("command", command);
  m.set("config.source", sc.source);
  m.set("config.sha256", sha256_hex(sc.config_bytes));
  for (const auto& [k, v] : sc.entries) m.set("config." + k, v);
  const MaterialPair& mat = sc.setup.material;
  m.set("hypothesis", to_string(classify_hypothesis(mat)));
  m.set("h2_family", mat.vanishing_transverse ? "Q1_R(q11,q12) + eps*q22^2" : "off");
  m.set("C0_W", mat.W0().C0);
  m.set("C0_R", mat.R0().C0);
  const Eigen::Matrix2d q1w = mat.W1().C, q1r = mat.R1().C;
  m.set("Q1_W", format_double(q1w(0, 0)) + "," + format_double(q1w(0, 1)) + "," + format_double(q1w(1, 1)));
  m.set("Q1_R", format_double(q1r(0, 0)) + "," + format_double(q1r(0, 1)) + "," + format_double(q1r(1, 1)));
  m.set("solver.tol", sc.setup.solver.tol);
  m.set("solver.max_newton", std::to_string(sc.setup.solver.max_newton));
  m.set("solver.armijo", sc.setup.solver.armijo);
  m.set("solver.max_backtracks", std::to_string(sc.setup.solver.max_backtracks));
  m.set("solver.exec", sc.exec == Exec::Serial ? "serial" : "parallel");
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  m.set("wall_clock.start", stamp);
  return m;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp);
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

std::string ledger_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << kLedgerHeader << '\n';
  for (const LedgerRow& r : traj.ledger)
    os << r.n << ',' << format_double(r.t) << ',' << format_double(r.energy) << ',' << format_double(r.step_dist) << ','
       << format_double(r.slope) << ',' << format_double(r.phi_residual) << ',' << r.newton_iters << '\n';
  return os.str();
}

std::string snapshot_text(const Trajectory& traj, const std::string& model) {
  std::ostringstream os;
  const long size = traj.states.empty() ? 0 : traj.states.front().size();
  os << "# vkr-snapshot 1\n";
  os << "model " << model << '\n';
  os << "tau " << format_double(traj.tau) << '\n';
  os << "T " << format_double(traj.T) << '\n';
  os << "states " << traj.states.size() << '\n';
  os << "size " << size << '\n';
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    if (traj.states[n].size() != size) throw std::invalid_argument("snapshot: states differ in size");
    os << "state " << n;
    for (long i = 0; i < size; ++i) os << ' ' << format_double(traj.states[n][i]);
    os << '\n';
  }
  return os.str();
}

Trajectory parse_snapshot(const std::string& text, std::string* model) {
  std::istringstream is(text);
  std::string line, tag;
  auto expect = [&](const std::string& want) {
    if (!(is >> tag) || tag != want) throw std::runtime_error("snapshot: expected '" + want + "'");
  };
  std::getline(is, line);
  if (line != "# vkr-snapshot 1") throw std::runtime_error("snapshot: bad header");
  Trajectory tr;
  std::string m, num;
  std::size_t count = 0;
  long size = 0;
  expect("model");
  is >> m;
  expect("tau");
  is >> num;
  tr.tau = std::strtod(num.c_str(), nullptr);
  expect("T");
  is >> num;
  tr.T = std::strtod(num.c_str(), nullptr);
  expect("states");
  is >> count;
  expect("size");
  is >> size;
  if (!is) throw std::runtime_error("snapshot: truncated header");
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t idx = 0;
    expect("state");
    is >> idx;
    if (idx != n) throw std::runtime_error("snapshot: states out of order");
    Vec v(size);
    for (long i = 0; i < size; ++i) {
      if (!(is >> num)) throw std::runtime_error("snapshot: truncated state " + std::to_string(n));
      char* end = nullptr;
      v[i] = std::strtod(num.c_str(), &end);
      if (*end != '\0') throw std::runtime_error("snapshot: bad number '" + num + "'");
    }
    tr.states.push_back(std::move(v));
  }
  if (model) *model = m;
  return tr;
}

void write_snapshot(const std::string& path, const Trajectory& traj, const std::string& model) {
  atomic_write(path, snapshot_text(traj, model));
}

Trajectory read_snapshot(const std::string& path, std::string* model) { return parse_snapshot(read_file(path), model); }

}  // namespace vkr
