#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <vector>

#include "tdc/field.hpp"
#include "tdc/geometry.hpp"

namespace tdc {

enum class DomainVariant { full, obstacle };
enum class LinearSolver { direct, cg };

struct SchemeOptions {
  LinearSolver solver = LinearSolver::direct;
  double cg_tol = 1e-10;
  int cg_max_iter = 20000;
};

// Smallest nt >= 2 with T/nt <= h/(2b).
int cfl_steps(double T, double h, double b);

// Finite-volume IMEX step shared by the adjoint, forward and Gramian solvers.
//
// Adjoint in reversed time: psi' = eps*Lap(psi) + div(psi B) + src, with
// zero total flux on Gamma. One physical step t_{n+1} -> t_n is
//   phi^n = A^{-1} ((I + dt D_n) phi^{n+1} + dt src^n),   A = I - dt eps L,
// where D_n is the conservative upwind operator with velocities at t_{n+1}.
// The forward system uses the exact transpose R_n^T = (I + dt D_n^T) A^{-1}.
class Scheme {
 public:
  Scheme(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
         DomainVariant variant = DomainVariant::full, SchemeOptions opts = {});
  ~Scheme();
  Scheme(const Scheme&) = delete;
  Scheme& operator=(const Scheme&) = delete;

  int size() const { return grid_.size(); }
  const Grid& grid() const { return grid_; }
  const TimeGrid& timegrid() const { return tg_; }
  double epsilon() const { return eps_; }
  DomainVariant variant() const { return variant_; }
  const VectorField& field() const { return field_; }
  const std::vector<char>& unknowns() const { return unknown_; }

  void adjoint_step(int n, const Eigen::VectorXd& next, Eigen::VectorXd& out,
                    const Eigen::VectorXd* src = nullptr) const;
  void forward_step(int n, const Eigen::VectorXd& y, Eigen::VectorXd& out) const;

  // D_n x and D_n^T x.
  void advect(int n, const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  void advect_transpose(int n, const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
  Eigen::VectorXd solve_diffusion(const Eigen::VectorXd& rhs) const;

  // Discrete divergence eps * div_h(f) for a face-averaged vector field.
  Eigen::VectorXd flux_divergence(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2) const;

  // <-L v, v>_M, the discrete Dirichlet energy int |grad v|^2.
  double gradient_energy(const Eigen::VectorXd& v) const;
  // Max over cells of the discrete divergence of B at time t.
  double max_discrete_divergence(double t) const;
  // Face-normal velocity of B (from cell p towards its neighbor) at time t.
  double face_velocity(int face, double t) const;
  int face_count() const { return static_cast<int>(faces_.size()); }

 private:
  struct Face {
    int p, q;  // q = -1 for an absorbing (Dirichlet) face
    Vec2 mid;
    Vec2 normal;
    double stream_flux;  // solenoidal part of B.n averaged over the face
  };

  void face_speeds(double t, std::vector<double>& out) const;

  VectorField field_;
  Grid grid_;
  TimeGrid tg_;
  double eps_;
  DomainVariant variant_;
  SchemeOptions opts_;
  std::vector<char> unknown_;
  std::vector<Face> faces_;
  std::vector<double> static_speed_;
  Eigen::SparseMatrix<double> A_;
  struct Solver;
  std::unique_ptr<Solver> solver_;
};

}  // namespace tdc
