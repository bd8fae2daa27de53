#include "tdc/cost.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tdc/adjoint.hpp"
#include "tdc/error.hpp"
#include "tdc/parallel.hpp"

namespace tdc {

GramianHandle::GramianHandle(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                             SchemeOptions opts)
    : scheme_(std::make_shared<Scheme>(field, grid, tg, epsilon, DomainVariant::full, opts)) {}

GramianHandle make_gramians(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                            SchemeOptions opts) {
  return GramianHandle(field, grid, tg, epsilon, opts);
}

Eigen::VectorXd GramianHandle::apply_A0(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out;
  march_adjoint(*scheme_, v, nullptr, [&](int n, const Eigen::VectorXd& phi) {
    if (n == 0) out = phi;
  });
  return out;
}

Eigen::VectorXd GramianHandle::apply_A0_adjoint(const Eigen::VectorXd& w) const {
  Eigen::VectorXd y = w, next;
  for (int n = 0; n < timegrid().nt; ++n) {
    scheme_->forward_step(n, y, next);
    y.swap(next);
  }
  return y;
}

std::vector<Eigen::VectorXd> GramianHandle::apply_Aw(const Eigen::VectorXd& v) const {
  const Grid& g = grid();
  int nt = timegrid().nt;
  std::vector<Eigen::VectorXd> u(nt);
  march_adjoint(*scheme_, v, nullptr, [&](int n, const Eigen::VectorXd& phi) {
    if (n == 0) return;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(g.size());
    for (int c = 0; c < g.size(); ++c)
      if (g.omega_mask[c]) r[c] = phi[c];
    u[n - 1] = std::move(r);
  });
  return u;
}

Eigen::VectorXd GramianHandle::apply_Aw_adjoint(const std::vector<Eigen::VectorXd>& u) const {
  auto y = solve_forward(*scheme_, Eigen::VectorXd::Zero(size()), &u);
  return y.back();
}

Eigen::VectorXd GramianHandle::apply_H(const Eigen::VectorXd& v) const { return apply_A0_adjoint(apply_A0(v)); }

Eigen::VectorXd GramianHandle::apply_G(const Eigen::VectorXd& v) const { return apply_Aw_adjoint(apply_Aw(v)); }

double GramianHandle::inner_M(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return grid().h * grid().h * a.dot(b);
}

double GramianHandle::inner_omegaT(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) const {
  const Grid& g = grid();
  double s = 0.0;
  for (size_t n = 0; n < a.size(); ++n)
    for (int c = 0; c < g.size(); ++c)
      if (g.omega_mask[c]) s += a[n][c] * b[n][c];
  return s * timegrid().dt() * g.h * g.h;
}

double GramianHandle::trace_scale(unsigned seed, int samples) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double acc = 0.0;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd z(size());
    for (int c = 0; c < size(); ++c) z[c] = nd(rng);
    acc += z.dot(apply_G(z)) / z.squaredNorm();
  }
  return acc / samples;
}

Eigen::VectorXd cost_start_vector(const Grid& grid, unsigned seed) {
  int far = 0;
  double best = -1e300;
  for (int c = 0; c < grid.size(); ++c) {
    double d = -grid.domain.control.signed_distance(grid.centers[c]);
    if (d > best) {
      best = d;
      far = c;
    }
  }
  double sigma = 0.1 * grid.domain.shape.diameter();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(grid.size());
  for (int c = 0; c < grid.size(); ++c) {
    Vec2 d = grid.centers[c] - grid.centers[far];
    v[c] = std::exp(-dot(d, d) / (2 * sigma * sigma)) + 1e-3 * nd(rng);
  }
  return v / v.norm();
}

namespace {

// CG on (G + delta I) x = b, warm-started from x.
int gram_cg(const GramianHandle& H, double delta, const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
            int max_iter) {
  auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return H.apply_G(v) + delta * v; };
  Eigen::VectorXd r = b - op(x);
  double bn = b.norm();
  if (bn == 0.0) {
    x.setZero();
    return 0;
  }
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  int it = 0;
  while (it < max_iter && std::sqrt(rr) > tol * bn) {
    Eigen::VectorXd Ap = op(p);
    double alpha = rr / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    double rr2 = r.squaredNorm();
    p = r + (rr2 / rr) * p;
    rr = rr2;
    ++it;
  }
  return it;
}

}  // namespace

CostEstimate estimate_cost(const GramianHandle& handle, double delta, double tol, int max_iter, unsigned seed) {
  if (!(delta > 0.0)) throw Error(Errc::invalid_argument, "estimate_cost needs delta > 0");
  CostEstimate est;
  est.delta = delta;
  est.epsilon = handle.epsilon();
  est.T = handle.timegrid().T;
  int n = handle.size();
  Eigen::VectorXd v = cost_start_vector(handle.grid(), seed);
  Eigen::VectorXd w;
  int inner_max = 20 * n + 200;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd Hv = handle.apply_H(v);
    Eigen::VectorXd Bv = handle.apply_G(v) + delta * v;
    double den = v.dot(Bv);
    est.mu = v.dot(Hv) / den;
    est.K = std::sqrt(std::max(est.mu, 0.0));
    est.iterations = it;
    double hn = Hv.norm();
    if (hn == 0.0) {
      est.residual = 0.0;
      return est;
    }
    est.residual = (Hv - est.mu * Bv).norm() / hn;
    if (est.residual <= tol) return est;
    w = est.mu * v;
    gram_cg(handle, delta, Hv, w, std::max(1e-13, 1e-2 * est.residual), inner_max);
    v = w / w.norm();
  }
  throw Error(Errc::non_convergence, "power iteration reached max_iter with residual " + std::to_string(est.residual) +
                                         " and mu " + std::to_string(est.mu));
}

CostEstimate dense_oracle_cost(const GramianHandle& handle, double delta) {
  int n = handle.size();
  if (n > 144 || handle.timegrid().nt > 16)
    throw Error(Errc::oracle_too_large, "dense oracle limited to 144 cells and nt <= 16");
  Eigen::MatrixXd H(n, n), G(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, k);
    H.col(k) = handle.apply_H(e);
    G.col(k) = handle.apply_G(e);
  }
  H = 0.5 * (H + H.transpose()).eval();
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::MatrixXd B = G + delta * Eigen::MatrixXd::Identity(n, n);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, B);
  if (es.info() != Eigen::Success) throw Error(Errc::solver_convergence, "dense generalized eigensolve failed");
  CostEstimate est;
  est.mu = es.eigenvalues().maxCoeff();
  est.K = std::sqrt(std::max(est.mu, 0.0));
  est.delta = delta;
  est.epsilon = handle.epsilon();
  est.T = handle.timegrid().T;
  est.iterations = 1;
  return est;
}

CostEstimate dense_oracle_cost(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                               double delta) {
  if (grid.size() > 144 || tg.nt > 16)
    throw Error(Errc::oracle_too_large, "dense oracle limited to 144 cells and nt <= 16");
  return dense_oracle_cost(GramianHandle(field, grid, tg, epsilon), delta);
}

std::vector<Vec2> family_centers(const Region& domain, const FamilyOptions& opts) {
  std::vector<Vec2> cs;
  Vec2 lo = domain.bbox_lo(), hi = domain.bbox_hi();
  int nx = static_cast<int>(std::floor((hi.x - lo.x) / opts.spacing + 1e-9));
  int ny = static_cast<int>(std::floor((hi.y - lo.y) / opts.spacing + 1e-9));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Vec2 c{lo.x + i * opts.spacing, lo.y + j * opts.spacing};
      if (domain.signed_distance(c) > opts.margin) cs.push_back(c);
    }
  return cs;
}

FamilyEstimate family_cost(const GramianHandle& handle, const FamilyOptions& opts) {
  const Grid& g = handle.grid();
  auto centers = family_centers(g.domain.shape, opts);
  if (centers.empty()) throw Error(Errc::invalid_argument, "no bump centers fit inside the domain");
  std::vector<double> ratio(centers.size(), 0.0);
  double dt = handle.timegrid().dt(), h2 = g.h * g.h;
  parallel_for(static_cast<int>(centers.size()), [&](int k) {
    Eigen::VectorXd v(g.size());
    for (int c = 0; c < g.size(); ++c) {
      Vec2 d = g.centers[c] - centers[k];
      v[c] = std::exp(-dot(d, d) / (2 * opts.sigma * opts.sigma));
    }
    v /= std::sqrt(h2 * v.squaredNorm());
    double init = 0.0, obs = 0.0;
    march_adjoint(handle.scheme(), v, nullptr, [&](int n, const Eigen::VectorXd& phi) {
      if (n == 0) init = h2 * phi.squaredNorm();
      if (n == 0) return;
      double s = 0.0;
      for (int c = 0; c < g.size(); ++c)
        if (g.omega_mask[c]) s += phi[c] * phi[c];
      obs += dt * h2 * s;
    });
    ratio[k] = obs > 0.0 ? init / obs : std::numeric_limits<double>::infinity();
  });
  size_t best = std::max_element(ratio.begin(), ratio.end()) - ratio.begin();
  FamilyEstimate fe;
  fe.candidates = static_cast<int>(centers.size());
  fe.best_center = centers[best];
  fe.estimate.mu = ratio[best];
  fe.estimate.K = std::sqrt(ratio[best]);
  fe.estimate.iterations = fe.candidates;
  fe.estimate.residual = 0.0;
  fe.estimate.delta = 0.0;
  fe.estimate.epsilon = handle.epsilon();
  fe.estimate.T = handle.timegrid().T;
  return fe;
}

ControlResult synthesize_control(const GramianHandle& handle, const Eigen::VectorXd& y0, double penalty, double tol,
                                 int max_iter) {
  if (!(penalty > 0.0)) throw Error(Errc::invalid_argument, "synthesize_control needs penalty > 0");
  ControlResult res;
  const Grid& g = handle.grid();
  int nt = handle.timegrid().nt;
  Eigen::VectorXd b = -handle.apply_A0_adjoint(y0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(handle.size());
  double bn = b.norm();
  if (bn > 0.0) {
    auto op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return handle.apply_G(x) + penalty * x; };
    Eigen::VectorXd r = b, p = b;
    double rr = r.squaredNorm();
    res.residual_history.push_back(1.0);
    while (std::sqrt(rr) > tol * bn) {
      if (res.iterations >= max_iter) {
        std::string hist;
        for (size_t k = res.residual_history.size() > 5 ? res.residual_history.size() - 5 : 0;
             k < res.residual_history.size(); ++k)
          hist += " " + std::to_string(res.residual_history[k]);
        throw Error(Errc::non_convergence, "control CG did not converge; last residuals:" + hist);
      }
      Eigen::VectorXd Ap = op(p);
      double alpha = rr / p.dot(Ap);
      v += alpha * p;
      r -= alpha * Ap;
      double rr2 = r.squaredNorm();
      p = r + (rr2 / rr) * p;
      rr = rr2;
      ++res.iterations;
      res.residual_history.push_back(std::sqrt(rr) / bn);
    }
  }
  res.u = handle.apply_Aw(v);
  if (bn == 0.0)
    for (auto& un : res.u) un.setZero();
  auto y = solve_forward(handle.scheme(), y0, &res.u);
  res.terminal_norm = std::sqrt(norm2(g, y.back()));
  res.control_norm = std::sqrt(handle.inner_omegaT(res.u, res.u));
  (void)nt;
  return res;
}

}  // namespace tdc
