#include "tdc/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tdc/error.hpp"
#include "tdc/parallel.hpp"

namespace tdc {

namespace {

SchemeInfo info_of(const Scheme& s) {
  SchemeInfo info;
  info.dt = s.timegrid().dt();
  info.h = s.grid().h;
  info.nt = s.timegrid().nt;
  return info;
}

Eigen::VectorXd source_at(const Scheme& scheme, const SourceSpec& src, int n) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(scheme.size());
  if (static_cast<int>(src.f0.size()) > n) s += src.f0[n];
  if (static_cast<int>(src.f1.size()) > n && static_cast<int>(src.f2.size()) > n)
    s += scheme.flux_divergence(src.f1[n], src.f2[n]);
  return s;
}

}  // namespace

void march_adjoint(const Scheme& scheme, const Eigen::VectorXd& phi_T, const SourceSpec* source,
                   const std::function<void(int, const Eigen::VectorXd&)>& visit) {
  if (phi_T.size() != scheme.size()) throw Error(Errc::invalid_argument, "terminal data has the wrong size");
  int nt = scheme.timegrid().nt;
  Eigen::VectorXd cur = phi_T, next;
  if (scheme.variant() == DomainVariant::obstacle)
    for (int c = 0; c < scheme.size(); ++c)
      if (!scheme.unknowns()[c]) cur[c] = 0.0;
  visit(nt, cur);
  for (int n = nt - 1; n >= 0; --n) {
    if (source) {
      Eigen::VectorXd s = source_at(scheme, *source, n);
      scheme.adjoint_step(n, cur, next, &s);
    } else {
      scheme.adjoint_step(n, cur, next);
    }
    if (!next.allFinite()) throw Error(Errc::solver_convergence, "adjoint solution became non-finite");
    cur.swap(next);
    visit(n, cur);
  }
}

AdjointSolution solve_adjoint(const Scheme& scheme, const Eigen::VectorXd& phi_T, const SourceSpec* source) {
  AdjointSolution sol;
  sol.epsilon = scheme.epsilon();
  sol.scheme = info_of(scheme);
  sol.domain_variant = scheme.variant();
  sol.timegrid = scheme.timegrid();
  sol.phi.resize(scheme.timegrid().nt + 1);
  march_adjoint(scheme, phi_T, source, [&](int n, const Eigen::VectorXd& v) { sol.phi[n] = v; });
  return sol;
}

AdjointSolution solve_adjoint(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                              const Eigen::VectorXd& phi_T, const SourceSpec* source, DomainVariant variant,
                              SchemeOptions opts) {
  Scheme scheme(field, grid, tg, epsilon, variant, opts);
  return solve_adjoint(scheme, phi_T, source);
}

std::vector<Eigen::VectorXd> solve_forward(const Scheme& scheme, const Eigen::VectorXd& y0,
                                           const std::vector<Eigen::VectorXd>* u) {
  const Grid& g = scheme.grid();
  int nt = scheme.timegrid().nt;
  if (y0.size() != scheme.size()) throw Error(Errc::invalid_argument, "initial data has the wrong size");
  if (u && static_cast<int>(u->size()) != nt) throw Error(Errc::invalid_argument, "control needs nt time slices");
  double dt = scheme.timegrid().dt();
  std::vector<Eigen::VectorXd> y(nt + 1);
  y[0] = y0;
  for (int n = 0; n < nt; ++n) {
    scheme.forward_step(n, y[n], y[n + 1]);
    if (u) {
      const Eigen::VectorXd& un = (*u)[n];
      for (int c = 0; c < g.size(); ++c)
        if (g.omega_mask[c]) y[n + 1][c] += dt * un[c];
    }
    if (!y[n + 1].allFinite()) throw Error(Errc::solver_convergence, "forward solution became non-finite");
  }
  return y;
}

std::vector<Eigen::VectorXd> solve_forward(const VectorField& field, const Grid& grid, const TimeGrid& tg,
                                           double epsilon, const Eigen::VectorXd& y0,
                                           const std::vector<Eigen::VectorXd>* u, SchemeOptions opts) {
  Scheme scheme(field, grid, tg, epsilon, DomainVariant::full, opts);
  return solve_forward(scheme, y0, u);
}

double control_pairing(const Grid& grid, const TimeGrid& tg, const std::vector<Eigen::VectorXd>& u,
                       const std::vector<Eigen::VectorXd>& phi) {
  double s = 0.0;
  for (int n = 0; n < tg.nt; ++n)
    for (int c = 0; c < grid.size(); ++c)
      if (grid.omega_mask[c]) s += u[n][c] * phi[n + 1][c];
  return s * tg.dt() * grid.h * grid.h;
}

EnergyReport energy_decay_check(const AdjointSolution& sol, const Grid& grid, const VectorField& field,
                                double rel_tol) {
  double CB = field.bounds().div;
  const TimeGrid& tg = sol.timegrid;
  int nt = tg.nt;
  double ref = norm2(grid, sol.phi[nt]);
  EnergyReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= nt; ++n) {
    double e = norm2(grid, sol.phi[n]) - std::exp(CB * (tg.time(nt) - tg.time(n))) * ref;
    rep.max_excess = std::max(rep.max_excess, e);
  }
  rep.relative_excess = ref > 0.0 ? rep.max_excess / ref : rep.max_excess;
  rep.pass = rep.max_excess <= rel_tol * ref + 1e-300;
  return rep;
}

AgmonReport agmon_check(const VectorField& field, const Grid& grid, const TimeGrid& tg, double epsilon,
                        const Eigen::VectorXd& phi_T, const ThetaWeight* theta, double rel_tol) {
  Scheme scheme(field, grid, tg, epsilon);
  int nt = tg.nt;
  if (theta) {
    if (theta->values.rows() != grid.size() || theta->values.cols() != nt + 1)
      throw Error(Errc::invalid_argument, "theta is not on the solver grid");
    if (theta->values.maxCoeff() / epsilon > 700.0)
      throw Error(Errc::parameter_overflow, "theta/epsilon exceeds the overflow guard");
  }
  double CB = scheme.field().bounds().div;
  double h2 = grid.h * grid.h;
  double dt = tg.dt();
  double t2 = tg.time(nt);
  std::vector<double> norms(nt + 1), grads(nt + 1);
  march_adjoint(scheme, phi_T, nullptr, [&](int n, const Eigen::VectorXd& phi) {
    Eigen::VectorXd psi = phi;
    if (theta) psi = (theta->values.col(n).array() / epsilon).exp() * phi.array();
    norms[n] = h2 * psi.squaredNorm();
    grads[n] = scheme.gradient_energy(psi);
  });
  AgmonReport rep;
  rep.rhs = norms[nt];
  rep.psi_norms.resize(nt + 1);
  rep.gradient_integral.assign(nt + 1, 0.0);
  double acc = 0.0;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (int n = nt; n >= 0; --n) {
    rep.psi_norms[n] = 0.5 * norms[n];
    if (n < nt) acc += 2.0 * epsilon * dt * std::exp(-CB * (t2 - tg.time(n))) * grads[n];
    rep.gradient_integral[n] = acc;
    double lhs = std::exp(-CB * (t2 - tg.time(n))) * norms[n] + acc;
    rep.max_excess = std::max(rep.max_excess, lhs - rep.rhs);
  }
  rep.tolerance = rel_tol * rep.rhs;
  rep.pass = rep.max_excess <= rep.tolerance;
  return rep;
}

FitResult least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = x.size();
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  FitResult f;
  if (sxx <= 0.0) throw Error(Errc::invalid_argument, "least squares needs distinct abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy <= 1e-300 * std::max(1.0, my * my)) {
    f.r2 = 0.0;
  } else {
    double ssr = 0.0;
    for (size_t k = 0; k < n; ++k) {
      double e = y[k] - (f.intercept + f.slope * x[k]);
      ssr += e * e;
    }
    f.r2 = 1.0 - ssr / syy;
  }
  return f;
}

DecayTable dissipation_decay(const VectorField& field, const Grid& grid, int nt, const std::vector<double>& eps_list,
                             double t0, double T0, const Eigen::VectorXd& g) {
  if (!grid.domain.obstacle) throw Error(Errc::invalid_argument, "dissipation_decay needs omega0 as the obstacle");
  if (eps_list.size() < 3) throw Error(Errc::invalid_argument, "dissipation_decay needs at least 3 epsilons");
  std::vector<char> U = grid.unknown_mask();
  Eigen::VectorXd gu = g;
  for (int c = 0; c < grid.size(); ++c)
    if (!U[c]) {
      if (g[c] != 0.0) throw Error(Errc::invalid_argument, "g must be supported in U");
      gu[c] = 0.0;
    }
  double gn = norm2(grid, gu, &U);
  if (!(gn > 0.0)) throw Error(Errc::invalid_argument, "dissipation_decay rejects zero data");
  TimeGrid tg{T0, nt, t0 - T0};
  DecayTable table;
  table.rows.resize(eps_list.size());
  parallel_for(static_cast<int>(eps_list.size()), [&](int k) {
    Scheme scheme(field, grid, tg, eps_list[k], DomainVariant::obstacle);
    double out = 0.0;
    march_adjoint(scheme, gu, nullptr, [&](int n, const Eigen::VectorXd& phi) {
      if (n == 0) out = norm2(grid, phi, &U);
    });
    table.rows[k] = {eps_list[k], out / gn};
  });
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    if (!(r.rho > 0.0)) throw Error(Errc::domain_error, "decay ratio underflowed to zero");
    x.push_back(1.0 / r.epsilon);
    y.push_back(std::log(r.rho));
  }
  table.fit = least_squares(x, y);
  return table;
}

}  // namespace tdc
