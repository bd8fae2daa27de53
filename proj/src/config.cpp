#include "tdc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tdc/error.hpp"
#include "tdc/field.hpp"

namespace tdc {

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "subcommand", "scenario",  "nx",       "nt",           "T",          "epsilon",  "epsilon_list",
      "delta",      "tol",       "max_iter", "kappa",        "s1",         "lambda1",  "lambda",
      "s_multiplier", "rho_hat", "seed",     "output_dir",   "estimator",  "linear_solver",
      "dump_csv",   "n_space",   "n_time",   "n_ball",       "T0",         "r0",       "n_data"};
  return keys;
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"flow-check", "verify-weights", "verify-solver", "cost-sweep"};
  return names;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty() && std::isfinite(d)) return d;
  } catch (...) {
  }
  throw Error(Errc::config, "value of '" + key + "' is not a number: '" + v + "'");
}

long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long d = std::stol(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (...) {
  }
  throw Error(Errc::config, "value of '" + key + "' is not an integer: '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(Errc::config, "value of '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

void guard(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::config, "precondition violated: " + what);
}

}  // namespace

void ConfigStore::set(const std::string& key_in, const std::string& value) {
  std::string key = trim(key_in);
  const auto& keys = config_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw Error(Errc::config, "unknown key '" + key + "'; valid keys: " + join(keys));
  values_[key] = trim(value);
}

void ConfigStore::load_text(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config, "line " + std::to_string(lineno) + ": expected 'key = value'");
    set(line.substr(0, eq), line.substr(eq + 1));
  }
}

void ConfigStore::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str());
}

std::string ConfigStore::get(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? std::string() : it->second;
}

RunConfig parse_config(const ConfigStore& store) {
  RunConfig c;
  for (const auto& [k, v] : store.values()) {
    if (k == "subcommand") c.subcommand = v;
    else if (k == "scenario") c.scenario = v;
    else if (k == "nx") c.nx = static_cast<int>(to_int(k, v));
    else if (k == "nt") c.nt = static_cast<int>(to_int(k, v));
    else if (k == "T") c.T = to_double(k, v);
    else if (k == "epsilon") c.epsilon = to_double(k, v);
    else if (k == "epsilon_list") c.epsilon_list = to_list(k, v);
    else if (k == "delta") c.delta = to_double(k, v);
    else if (k == "tol") c.tol = to_double(k, v);
    else if (k == "max_iter") c.max_iter = static_cast<int>(to_int(k, v));
    else if (k == "kappa") c.kappa = to_double(k, v);
    else if (k == "s1") c.s1 = to_double(k, v);
    else if (k == "lambda1") c.lambda1 = to_double(k, v);
    else if (k == "lambda") c.lambda = to_double(k, v);
    else if (k == "s_multiplier") c.s_multiplier = to_double(k, v);
    else if (k == "rho_hat") c.rho_hat = to_double(k, v);
    else if (k == "seed") c.seed = static_cast<unsigned>(to_int(k, v));
    else if (k == "output_dir") c.output_dir = v;
    else if (k == "estimator") c.estimator = v;
    else if (k == "linear_solver") c.linear_solver = v;
    else if (k == "dump_csv") c.dump_csv = to_bool(k, v);
    else if (k == "n_space") c.n_space = static_cast<int>(to_int(k, v));
    else if (k == "n_time") c.n_time = static_cast<int>(to_int(k, v));
    else if (k == "n_ball") c.n_ball = static_cast<int>(to_int(k, v));
    else if (k == "T0") c.T0 = to_double(k, v);
    else if (k == "r0") c.r0 = to_double(k, v);
    else if (k == "n_data") c.n_data = static_cast<int>(to_int(k, v));
  }
  validate_config(c);
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  ConfigStore s;
  s.load_file(path);
  return parse_config(s);
}

void validate_config(const RunConfig& c) {
  if (!c.subcommand.empty()) {
    const auto& names = subcommand_names();
    guard(std::find(names.begin(), names.end(), c.subcommand) != names.end(),
          "subcommand must be one of " + join(names));
  }
  guard(c.scenario == "flushing" || c.scenario == "blowup" || c.scenario == "heat",
        "scenario must be one of flushing, blowup, heat");
  guard(c.nx >= 8, "build_grid needs nx >= 8");
  guard(c.nt == 0 || c.nt >= 2, "time grid needs nt >= 2 (or 0 for the CFL default)");
  guard(c.T >= 0.0, "T must be positive (or 0 for the scenario default)");
  guard(c.epsilon > 0.0, "solvers need epsilon > 0");
  guard(c.epsilon_list.size() >= 3, "run_sweep needs at least 3 epsilons");
  for (double e : c.epsilon_list) guard(e > 0.0, "run_sweep needs positive epsilons");
  for (size_t k = 1; k < c.epsilon_list.size(); ++k)
    guard(c.epsilon_list[k] < c.epsilon_list[k - 1], "run_sweep needs a strictly decreasing epsilon_list");
  guard(c.delta > 0.0, "estimate_cost needs delta > 0");
  guard(c.tol > 0.0, "tol must be positive");
  guard(c.max_iter >= 1, "max_iter must be positive");
  guard(c.kappa > 0.0 && c.kappa < 1.0, "observability window needs 0 < kappa < 1");
  guard(c.s1 > 0.0, "s1 must be positive");
  guard(c.lambda1 >= 1.0, "lambda1 must be >= 1");
  guard(c.lambda >= 1.0, "Carleman parameters need lambda >= 1");
  guard(c.s_multiplier > 0.0, "s_multiplier must be positive");
  guard(c.rho_hat > 0.0, "rho_hat must be positive");
  guard(c.estimator == "family" || c.estimator == "power", "estimator must be family or power");
  guard(c.linear_solver == "direct" || c.linear_solver == "cg", "linear_solver must be direct or cg");
  guard(c.n_space >= 1 && c.n_time >= 1, "flushing sampling counts must be positive");
  guard(c.n_ball >= 25, "check_flushing needs n_ball >= 25");
  guard(c.T0 >= 0.0 && c.r0 >= 0.0, "T0 and r0 must be nonnegative");
  guard(c.n_data >= 1, "n_data must be positive");
  VectorField f = c.scenario == "flushing" ? VectorField::spiral(1.0)
                  : c.scenario == "blowup" ? VectorField::rotation()
                                           : VectorField::zero();
  f.compute_bounds(Region::disk({0, 0}, 1.0));
  double b = f.bounds().b;
  double eps_min = c.epsilon_list.back();
  if (b > 0.0) {
    int need = static_cast<int>(std::ceil(2.0 * b / eps_min - 1e-9));
    if (c.nx < need)
      throw Error(Errc::resolution_too_coarse, "nx=" + std::to_string(c.nx) + " violates h <= eps_min/b for eps_min=" +
                                                   std::to_string(eps_min) + "; need nx >= " + std::to_string(need));
  }
}

std::string config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["subcommand"] = c.subcommand;
  j["scenario"] = c.scenario;
  j["nx"] = c.nx;
  j["nt"] = c.nt;
  j["T"] = c.T;
  j["epsilon"] = c.epsilon;
  j["epsilon_list"] = c.epsilon_list;
  j["delta"] = c.delta;
  j["tol"] = c.tol;
  j["max_iter"] = c.max_iter;
  j["kappa"] = c.kappa;
  j["s1"] = c.s1;
  j["lambda1"] = c.lambda1;
  j["lambda"] = c.lambda;
  j["s_multiplier"] = c.s_multiplier;
  j["rho_hat"] = c.rho_hat;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["estimator"] = c.estimator;
  j["linear_solver"] = c.linear_solver;
  j["dump_csv"] = c.dump_csv;
  j["n_space"] = c.n_space;
  j["n_time"] = c.n_time;
  j["n_ball"] = c.n_ball;
  j["T0"] = c.T0;
  j["r0"] = c.r0;
  j["n_data"] = c.n_data;
  return j.dump(2);
}

}  // namespace tdc
