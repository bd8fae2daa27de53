#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdc/scheme.hpp"
#include "tdc/weights.hpp"

namespace tdc {

struct SchemeInfo {
  std::string flux = "finite-volume conservative upwind";
  std::string integrator = "IMEX: backward Euler diffusion, explicit upwind advection";
  double dt = 0.0;
  double h = 0.0;
  int nt = 0;
};

struct AdjointSolution {
  std::vector<Eigen::VectorXd> phi;  // time nodes 0..nt
  double epsilon = 0.0;
  SchemeInfo scheme;
  DomainVariant domain_variant = DomainVariant::full;
  TimeGrid timegrid;
};

// f0 plus eps * div(f1, f2); entry n is applied in the step t_{n+1} -> t_n.
struct SourceSpec {
  std::vector<Eigen::VectorXd> f0;
  std::vector<Eigen::VectorXd> f1;
  std::vector<Eigen::VectorXd> f2;
};

// Visits phi^n for n = nt, nt-1, ..., 0.
void march_adjoint(const Scheme& scheme, const Eigen::VectorXd& phi_T, const SourceSpec* source,
                   const std::function<void(int, const Eigen::VectorXd&)>& visit);

AdjointSolution solve_adjoint(const Scheme& scheme, const Eigen::VectorXd& phi_T, const SourceSpec* source = nullptr);
AdjointSolution solve_adjoint(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                              const Eigen::VectorXd& phi_T, const SourceSpec* source = nullptr,
                              DomainVariant variant = DomainVariant::full, SchemeOptions opts = {});

// y^{n+1} = R_n^T y^n + dt 1_omega u^n, n = 0..nt-1; returns y at all nodes.
std::vector<Eigen::VectorXd> solve_forward(const Scheme& scheme, const Eigen::VectorXd& y0,
                                           const std::vector<Eigen::VectorXd>* u);
std::vector<Eigen::VectorXd> solve_forward(const VectorField& field, const Grid& grid, const TimeGrid& tg,
                                           double epsilon, const Eigen::VectorXd& y0,
                                           const std::vector<Eigen::VectorXd>* u, SchemeOptions opts = {});

// sum_{n=0}^{nt-1} dt h^2 sum_omega u^n phi^{n+1}
double control_pairing(const Grid& grid, const TimeGrid& tg, const std::vector<Eigen::VectorXd>& u,
                       const std::vector<Eigen::VectorXd>& phi);

struct EnergyReport {
  double max_excess = 0.0;
  double relative_excess = 0.0;
  bool pass = false;
};

EnergyReport energy_decay_check(const AdjointSolution& sol, const Grid& grid, const VectorField& field,
                                double rel_tol = 1e-10);

struct AgmonReport {
  std::vector<double> psi_norms;  // E(t_n) = 1/2 int |psi|^2
  std::vector<double> gradient_integral;
  double max_excess = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// theta == nullptr means theta = 0.
AgmonReport agmon_check(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                        const Eigen::VectorXd& phi_T, const ThetaWeight* theta, double rel_tol = 1e-9);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares of y on x; R^2 = 0 when y is constant.
FitResult least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct DecayRow {
  double epsilon = 0.0;
  double rho = 0.0;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  FitResult fit;  // ln rho against 1/eps
};

// Obstacle system on [t0 - T0, t0] with terminal data g; grid carries omega0 as obstacle.
DecayTable dissipation_decay(const VectorField& field, const Grid& grid, int nt, const std::vector<double>& eps_list,
                             double t0, double T0, const Eigen::VectorXd& g);

}  // namespace tdc
