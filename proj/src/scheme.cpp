#include "tdc/scheme.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "tdc/error.hpp"

namespace tdc {

struct Scheme::Solver {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::IdentityPreconditioner> cg;
};

int cfl_steps(double T, double h, double b) {
  if (b <= 0.0) return 2;
  return std::max(2, static_cast<int>(std::ceil(T * 2.0 * b / h - 1e-9)));
}

Scheme::~Scheme() = default;

Scheme::Scheme(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon, DomainVariant variant,
               SchemeOptions opts)
    : field_(field), grid_(grid), tg_(tg), eps_(epsilon), variant_(variant), opts_(opts) {
  tg_.validate();
  if (!(eps_ > 0.0)) throw Error(Errc::invalid_argument, "epsilon must be positive");
  if (!field_.has_bounds()) field_.compute_bounds(grid_.domain.shape, tg_.t_begin + tg_.T);
  double b = field_.bounds().b;
  double h = grid_.h;
  if (tg_.dt() > h / (2.0 * b) * (1.0 + 1e-12))
    throw Error(Errc::step_size, "advective CFL violated: dt=" + std::to_string(tg_.dt()) +
                                     " > h/(2b)=" + std::to_string(h / (2.0 * b)) +
                                     "; need nt >= " + std::to_string(cfl_steps(tg_.T, h, b)));
  if (variant_ == DomainVariant::obstacle && !grid_.domain.obstacle)
    throw Error(Errc::invalid_argument, "obstacle variant needs a domain with an obstacle");
  int n = grid_.size();
  unknown_.assign(n, 1);
  if (variant_ == DomainVariant::obstacle) unknown_ = grid_.unknown_mask();

  // Stream function at lattice corners; corners touching an outside cell take
  // the value at their projection onto Gamma, so boundary fluxes vanish.
  std::vector<double> psi;
  bool stream = field_.has_stream();
  if (stream) {
    psi.resize(static_cast<size_t>(grid_.nx + 1) * (grid_.ny + 1));
    for (int J = 0; J <= grid_.ny; ++J)
      for (int I = 0; I <= grid_.nx; ++I) {
        bool boundary = grid_.active(I - 1, J - 1) < 0 || grid_.active(I, J - 1) < 0 ||
                        grid_.active(I - 1, J) < 0 || grid_.active(I, J) < 0;
        Vec2 c = grid_.corner(I, J);
        if (boundary) c = grid_.domain.shape.project_to_boundary(c);
        psi[I + (grid_.nx + 1) * J] = field_.stream(c);
      }
  }
  auto corner_psi = [&](int I, int J) { return psi[I + (grid_.nx + 1) * J]; };
  for (int c = 0; c < n; ++c) {
    if (!unknown_[c]) continue;
    int i = grid_.ci[c], j = grid_.cj[c];
    for (int dir : {face_east, face_west, face_north, face_south}) {
      int q = grid_.neighbor(c, dir);
      if (q < 0) continue;
      bool q_unknown = unknown_[q] != 0;
      // Interior faces are stored once (east/north); absorbing faces from the unknown side.
      if (q_unknown && (dir == face_west || dir == face_south)) continue;
      Face f;
      f.p = c;
      f.q = q_unknown ? q : -1;
      double sign = 1.0;
      int I = i, J = j;
      if (dir == face_east || dir == face_west) {
        if (dir == face_east) I = i + 1;
        else sign = -1.0;
        f.mid = {grid_.origin.x + I * h, grid_.centers[c].y};
        f.normal = {sign, 0.0};
        f.stream_flux = stream ? sign * (corner_psi(I, j + 1) - corner_psi(I, j)) / h : 0.0;
      } else {
        if (dir == face_north) J = j + 1;
        else sign = -1.0;
        f.mid = {grid_.centers[c].x, grid_.origin.y + J * h};
        f.normal = {0.0, sign};
        f.stream_flux = stream ? sign * (corner_psi(i, J) - corner_psi(i + 1, J)) / h : 0.0;
      }
      faces_.push_back(f);
    }
  }
  if (!field_.time_dependent()) face_speeds(0.0, static_speed_);

  double c = tg_.dt() * eps_ / (h * h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + 4 * faces_.size());
  for (int k = 0; k < n; ++k) trip.emplace_back(k, k, 1.0);
  for (const auto& f : faces_) {
    if (f.q < 0) {
      trip.emplace_back(f.p, f.p, 2.0 * c);
    } else {
      trip.emplace_back(f.p, f.p, c);
      trip.emplace_back(f.q, f.q, c);
      trip.emplace_back(f.p, f.q, -c);
      trip.emplace_back(f.q, f.p, -c);
    }
  }
  A_.resize(n, n);
  A_.setFromTriplets(trip.begin(), trip.end());
  solver_ = std::make_unique<Solver>();
  if (opts_.solver == LinearSolver::direct) {
    solver_->ldlt.compute(A_);
    if (solver_->ldlt.info() != Eigen::Success)
      throw Error(Errc::solver_convergence, "factorization of the diffusion matrix failed");
  } else {
    solver_->cg.setTolerance(opts_.cg_tol);
    solver_->cg.setMaxIterations(opts_.cg_max_iter);
    solver_->cg.compute(A_);
  }
}

double Scheme::face_velocity(int k, double t) const {
  const Face& f = faces_[k];
  return f.stream_flux + dot(field_.remainder(f.mid, t), f.normal);
}

void Scheme::face_speeds(double t, std::vector<double>& out) const {
  out.resize(faces_.size());
  for (size_t k = 0; k < faces_.size(); ++k) out[k] = -face_velocity(static_cast<int>(k), t);
}

void Scheme::advect(int n, const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  std::vector<double> dyn;
  const std::vector<double>* a = &static_speed_;
  if (field_.time_dependent()) {
    face_speeds(tg_.time(n + 1), dyn);
    a = &dyn;
  }
  out.setZero(x.size());
  double ih = 1.0 / grid_.h;
  for (size_t k = 0; k < faces_.size(); ++k) {
    const Face& f = faces_[k];
    double v = (*a)[k];
    double ap = std::max(v, 0.0), am = std::min(v, 0.0);
    if (f.q < 0) {
      out[f.p] -= ap * x[f.p] * ih;
      continue;
    }
    double F = (ap * x[f.p] + am * x[f.q]) * ih;
    out[f.p] -= F;
    out[f.q] += F;
  }
}

void Scheme::advect_transpose(int n, const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  std::vector<double> dyn;
  const std::vector<double>* a = &static_speed_;
  if (field_.time_dependent()) {
    face_speeds(tg_.time(n + 1), dyn);
    a = &dyn;
  }
  out.setZero(x.size());
  double ih = 1.0 / grid_.h;
  for (size_t k = 0; k < faces_.size(); ++k) {
    const Face& f = faces_[k];
    double v = (*a)[k];
    double ap = std::max(v, 0.0), am = std::min(v, 0.0);
    if (f.q < 0) {
      out[f.p] -= ap * x[f.p] * ih;
      continue;
    }
    double d = (x[f.q] - x[f.p]) * ih;
    out[f.p] += ap * d;
    out[f.q] += am * d;
  }
}

Eigen::VectorXd Scheme::solve_diffusion(const Eigen::VectorXd& rhs) const {
  if (opts_.solver == LinearSolver::direct) return solver_->ldlt.solve(rhs);
  Eigen::VectorXd x = solver_->cg.solveWithGuess(rhs, rhs);
  if (solver_->cg.info() != Eigen::Success || solver_->cg.error() > opts_.cg_tol)
    throw Error(Errc::solver_convergence, "CG on the diffusion system stopped at relative residual " +
                                              std::to_string(solver_->cg.error()));
  return x;
}

void Scheme::adjoint_step(int n, const Eigen::VectorXd& next, Eigen::VectorXd& out, const Eigen::VectorXd* src) const {
  Eigen::VectorXd d;
  advect(n, next, d);
  Eigen::VectorXd rhs = next + tg_.dt() * d;
  if (src) rhs += tg_.dt() * (*src);
  if (variant_ == DomainVariant::obstacle)
    for (int c = 0; c < size(); ++c)
      if (!unknown_[c]) rhs[c] = 0.0;
  out = solve_diffusion(rhs);
}

void Scheme::forward_step(int n, const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
  Eigen::VectorXd z = y;
  if (variant_ == DomainVariant::obstacle)
    for (int c = 0; c < size(); ++c)
      if (!unknown_[c]) z[c] = 0.0;
  z = solve_diffusion(z);
  Eigen::VectorXd d;
  advect_transpose(n, z, d);
  out = z + tg_.dt() * d;
}

Eigen::VectorXd Scheme::flux_divergence(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  double ih = 1.0 / grid_.h;
  for (const auto& f : faces_) {
    if (f.q < 0) continue;
    double F = 0.5 * ((f1[f.p] + f1[f.q]) * f.normal.x + (f2[f.p] + f2[f.q]) * f.normal.y) * ih;
    out[f.p] += F;
    out[f.q] -= F;
  }
  return eps_ * out;
}

double Scheme::gradient_energy(const Eigen::VectorXd& v) const {
  double s = 0.0;
  for (const auto& f : faces_) {
    if (f.q < 0)
      s += 2.0 * v[f.p] * v[f.p];
    else
      s += (v[f.q] - v[f.p]) * (v[f.q] - v[f.p]);
  }
  return s;
}

double Scheme::max_discrete_divergence(double t) const {
  Eigen::VectorXd div = Eigen::VectorXd::Zero(size());
  for (size_t k = 0; k < faces_.size(); ++k) {
    const Face& f = faces_[k];
    if (f.q < 0) continue;
    double u = face_velocity(static_cast<int>(k), t) / grid_.h;
    div[f.p] += u;
    div[f.q] -= u;
  }
  return div.size() ? div.maxCoeff() : 0.0;
}

}  // namespace tdc
