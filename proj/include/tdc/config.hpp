#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tdc {

struct RunConfig {
  std::string subcommand;
  std::string scenario = "flushing";
  int nx = 96;
  int nt = 0;
  double T = 0.0;
  double epsilon = 0.1;
  std::vector<double> epsilon_list{0.1, 0.05, 0.033, 0.025};
  double delta = 1e-10;
  double tol = 1e-8;
  int max_iter = 20000;
  double kappa = 0.5;
  double s1 = 1.0;
  double lambda1 = 2.0;
  double lambda = 2.0;
  double s_multiplier = 1.0;
  double rho_hat = 6.0;
  unsigned seed = 42;
  std::string output_dir = ".";
  std::string estimator = "family";
  std::string linear_solver = "direct";
  bool dump_csv = false;
  int n_space = 400;
  int n_time = 3;
  int n_ball = 25;
  double T0 = 0.0;
  double r0 = 0.0;
  int n_data = 5;
};

const std::vector<std::string>& config_keys();
const std::vector<std::string>& subcommand_names();

// Key-value store behind the file/flag front end: `key = value` lines,
// '#' starts a comment. Unknown keys are rejected.
class ConfigStore {
 public:
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void load_text(const std::string& text);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Fills defaults, parses and validates every knob.
RunConfig parse_config(const ConfigStore& store);
RunConfig parse_config_file(const std::string& path);
void validate_config(const RunConfig& cfg);

std::string config_to_json(const RunConfig& cfg);

// Exit status: 0 pass/completion, 1 verdict failure, 2 operational error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace tdc
