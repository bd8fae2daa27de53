#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdc/adjoint.hpp"
#include "tdc/cost.hpp"
#include "tdc/flow.hpp"

namespace tdc {

struct Scenario {
  std::string name;
  DomainSpec domain;
  VectorField field;
  double T = 1.0;
  bool flushing_expected = false;
  std::string notes;
  double T0 = 0.0;
  double r0 = 0.0;
  FamilyOptions family;
};

struct ScenarioOptions {
  double rho_hat = 6.0;
  double T = 0.0;  // > 0 overrides the scenario default
};

std::vector<std::string> scenario_names();
Scenario make_scenario(const std::string& name, const ScenarioOptions& opts = {});

struct SweepRow {
  double epsilon = 0.0;
  double K = 0.0;
  double mu = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double delta = 0.0;
  double K_delta_tenth = 0.0;  // power estimator only: K at delta/10
};

enum class Estimator { family, power };

struct SweepOptions {
  int nx = 96;
  int nt = 0;  // 0: smallest CFL-admissible count
  double delta_rel = 1e-10;
  double tol = 1e-8;
  int max_iter = 20000;
  unsigned seed = 42;
  Estimator estimator = Estimator::family;
  SchemeOptions scheme;
};

struct SweepResult {
  std::string scenario;
  std::vector<SweepRow> rows;
  std::optional<FitResult> fit;
  std::string verdict;
  double slope_tol = 0.0;
  double ratio = 0.0;
  int nx = 0;
  int nt = 0;
  double h = 0.0;
  double dt = 0.0;
  double T = 0.0;
  std::string estimator;
};

constexpr double kRatioTol = 10.0;
constexpr double kSlopeMin = 0.5;
constexpr double kR2Min = 0.9;

FitResult fit_log_cost(const std::vector<SweepRow>& rows);
std::string classify_sweep(const std::vector<SweepRow>& rows, const FitResult& fit, double* slope_tol = nullptr,
                           double* ratio = nullptr);

// nx needed for h <= eps_min / b.
int required_nx(const Scenario& sc, double eps_min);
int scenario_nt(const Scenario& sc, int nx, int nt_override = 0);

SweepResult run_sweep(const Scenario& sc, const std::vector<double>& eps_list, const SweepOptions& opts = {});

struct CarlemanRatioReport {
  double ratio = 0.0;
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  double s = 0.0;
  double lambda = 0.0;
  bool admissible = false;
};

CarlemanRatioReport carleman_ratio(const Scenario& sc, double epsilon, double lambda, double s_multiplier, int nx,
                                   int n_data = 4, unsigned seed = 42, double s1 = 1.0, double lambda1 = 2.0,
                                   const std::vector<Eigen::VectorXd>* data = nullptr);

struct WindowRow {
  double epsilon = 0.0;
  double R = 0.0;
};

struct WindowReport {
  std::vector<WindowRow> rows;
  std::optional<FitResult> fit;
};

WindowReport observability_window_check(const Scenario& sc, const std::vector<double>& eps_list, double kappa, int nx,
                                        int n_data = 4, unsigned seed = 42);

// Seeded Gaussian per-cell data projected to zero mean.
Eigen::VectorXd random_terminal_data(const Grid& grid, unsigned seed);

struct DissipationSetup {
  Grid grid;
  VectorField field;
  Eigen::VectorXd g;
  double T0 = 0.0;
  int nt = 0;
  Region omega0;
};

// "spiral": omega0 from shrink_target on the flushing scenario; "rotation":
// the same omega0 and T0 with data on an invariant annulus.
DissipationSetup dissipation_setup(const std::string& field_name, int nx);
DecayTable run_dissipation(const std::string& field_name, int nx, const std::vector<double>& eps_list);

}  // namespace tdc
