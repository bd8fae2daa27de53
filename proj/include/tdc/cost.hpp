#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "tdc/scheme.hpp"

namespace tdc {

struct CostEstimate {
  double K = 0.0;
  double mu = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double T = 0.0;
};

// The maps A0: phi_T -> phi(0) and A_omega: phi_T -> phi on omega x (0,T),
// their exact transposes, and the Gramians H = A0^* A0, G = A_omega^* A_omega.
// The mass matrix is M = h^2 I, so M-adjoints are Euclidean transposes.
class GramianHandle {
 public:
  GramianHandle(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                SchemeOptions opts = {});

  int size() const { return scheme_->size(); }
  const Scheme& scheme() const { return *scheme_; }
  const Grid& grid() const { return scheme_->grid(); }
  const TimeGrid& timegrid() const { return scheme_->timegrid(); }
  double epsilon() const { return scheme_->epsilon(); }

  Eigen::VectorXd apply_A0(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_A0_adjoint(const Eigen::VectorXd& w) const;
  // Entry n (n = 0..nt-1) holds 1_omega phi^{n+1}.
  std::vector<Eigen::VectorXd> apply_Aw(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_Aw_adjoint(const std::vector<Eigen::VectorXd>& u) const;
  Eigen::VectorXd apply_H(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_G(const Eigen::VectorXd& v) const;

  double inner_M(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double inner_omegaT(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) const;

  // Hutchinson estimate of trace(G)/n from a few seeded vectors.
  double trace_scale(unsigned seed = 42, int samples = 4) const;

 private:
  std::shared_ptr<Scheme> scheme_;
};

GramianHandle make_gramians(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                            SchemeOptions opts = {});

// Start vector: Gaussian bump at the cell farthest from omega plus a small
// seeded perturbation.
Eigen::VectorXd cost_start_vector(const Grid& grid, unsigned seed);

CostEstimate estimate_cost(const GramianHandle& handle, double delta, double tol = 1e-8, int max_iter = 20000,
                           unsigned seed = 42);

CostEstimate dense_oracle_cost(const GramianHandle& handle, double delta);
CostEstimate dense_oracle_cost(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                               double delta);

struct FamilyOptions {
  double sigma = 0.07;
  double spacing = 0.1;
  double margin = 0.03;
};

struct FamilyEstimate {
  CostEstimate estimate;
  int candidates = 0;
  Vec2 best_center;
};

// Max of the exact quotient ||A0 v|| / ||A_omega v|| over normalized Gaussian bumps.
FamilyEstimate family_cost(const GramianHandle& handle, const FamilyOptions& opts = {});
std::vector<Vec2> family_centers(const Region& domain, const FamilyOptions& opts);

struct ControlResult {
  std::vector<Eigen::VectorXd> u;
  double terminal_norm = 0.0;
  double control_norm = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
};

ControlResult synthesize_control(const GramianHandle& handle, const Eigen::VectorXd& y0, double penalty,
                                 double tol = 1e-10, int max_iter = 2000);

}  // namespace tdc
