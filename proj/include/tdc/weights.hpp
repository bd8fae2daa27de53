#pragma once

#include <Eigen/Core>
#include <vector>

#include "tdc/field.hpp"
#include "tdc/geometry.hpp"

namespace tdc {

struct EtaWeight {
  Eigen::VectorXd values;
  Eigen::VectorXd gx;
  Eigen::VectorXd gy;
  double delta = 0.0;
  Region omega_prime;
};

EtaWeight build_eta(const Grid& grid, const Region& omega_prime);

double compute_BT(const VectorField& field);

struct CarlemanParams {
  double lambda = 2.0;
  double s = 1.0;
  double epsilon = 0.1;
  double T = 1.0;
  double BT = 1.0;
  double s1 = 1.0;
  double lambda1 = 2.0;
  bool diagnostic = false;

  double s_threshold() const { return (s1 / epsilon) * (T * T + T) * BT; }
  bool admissible() const { return lambda >= lambda1 && s >= s_threshold(); }
  // s = multiplier * (s1/eps)(T^2+T) B_T
  static CarlemanParams from_rule(double epsilon, double T, double BT, double lambda, double multiplier,
                                  double s1 = 1.0, double lambda1 = 2.0);
};

// Weights on the interior time nodes n = 1..nt-1 (columns), one row per cell.
struct CarlemanWeights {
  Eigen::MatrixXd alpha_plus, alpha_minus, xi_plus, xi_minus;
  std::vector<double> times;
};

CarlemanWeights build_carleman(const EtaWeight& eta, const CarlemanParams& params, const TimeGrid& tg);

struct CheckLine {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

std::vector<CheckLine> check_eta(const Grid& grid, const EtaWeight& eta);
std::vector<CheckLine> check_carleman(const Grid& grid, const EtaWeight& eta, const CarlemanParams& params,
                                      const CarlemanWeights& w, const TimeGrid& tg);

// theta(x,t) = f(t) g(|Psi(x,t) - x0|), Psi(x,t) = Phi(t2, t, x).
class ThetaWeight {
 public:
  Eigen::MatrixXd values;  // cells x (nt+1), time nodes t1 + n dt
  TimeGrid timegrid;       // t_begin = t1, T = t2 - t1
  Vec2 x0;
  double r = 0.0;
  double c0 = 0.0;
  double t1 = 0.0, t2 = 0.0;
  double K = 0.0;
  double t_star = 0.0;
  double lipschitz_psi = 1.0;
  double lipschitz = 0.0;        // bound on |grad theta|
  double curvature_scale = 0.0;  // bound used for the finite-difference tolerance
  double step = 0.0;
  VectorField field;

  double f(double t) const { return 1.0 / (K * (t_star - t)); }
  double evaluate(Vec2 x, double t) const;
};

// Smoothstep S(u) = 6u^5 - 15u^4 + 10u^3 and the constants used by theta.
double smoothstep(double u);
double smoothstep_ratio_max();  // max over (0,1] of S'(u)^2 / S(u)

ThetaWeight build_theta(const VectorField& field, Vec2 x0, double r, double t1, double t2, const Grid& grid,
                        const TimeGrid& tg);

struct ThetaReport {
  double min_lhs = 0.0;
  double tol = 0.0;
  int hard_violations = 0;
  double soft_excess = 0.0;  // max of (-lhs)^+
  int tube_violations = 0;
  int floor_violations = 0;
  int nodes = 0;
};

// With values given explicitly (theta.values) this checks any candidate.
ThetaReport verify_theta(const ThetaWeight& theta, const VectorField& field, const Grid& grid,
                         int n_fresh = 200);

}  // namespace tdc
