#include "tdc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tdc/error.hpp"
#include "tdc/parallel.hpp"
#include "tdc/weights.hpp"

namespace tdc {

std::vector<std::string> scenario_names() { return {"flushing", "blowup", "heat"}; }

Scenario make_scenario(const std::string& name, const ScenarioOptions& opts) {
  Scenario sc;
  sc.name = name;
  Region disk = Region::disk({0, 0}, 1.0);
  if (name == "flushing") {
    sc.domain = {disk, Region::disk({0, 0}, 0.5), std::nullopt};
    sc.field = VectorField::spiral(1.0);
    sc.field.compute_bounds(disk);
    auto est = estimate_T0_r0(sc.field, disk, sc.domain.control);
    sc.T0 = est.T0;
    sc.r0 = est.r0;
    sc.T = opts.T > 0.0 ? opts.T : opts.rho_hat * est.T0;
    if (sc.T < opts.rho_hat * est.T0)
      sc.notes = "T below rho_hat*T0; boundedness not expected to be verified";
    else
      sc.notes = "spiral field, every backward trajectory enters omega";
    sc.flushing_expected = true;
    sc.family.spacing = 0.15;
  } else if (name == "blowup") {
    sc.domain = {disk, Region::disk({0.6, 0}, 0.15), std::nullopt};
    sc.field = VectorField::rotation();
    sc.field.compute_bounds(disk);
    sc.T = opts.T > 0.0 ? opts.T : 0.5;
    if (!(sc.T < 2 * M_PI * 0.25))
      throw Error(Errc::invalid_argument, "blowup scenario needs T < pi/2 so the circle |x|=0.6 avoids omega");
    sc.flushing_expected = false;
    sc.notes = "rotation field; the trajectory through (-0.6,0) stays outside omega on [0,T]";
  } else if (name == "heat") {
    sc.domain = {disk, Region::disk({0, 0}, 0.5), std::nullopt};
    sc.field = VectorField::zero();
    sc.field.compute_bounds(disk);
    sc.T = opts.T > 0.0 ? opts.T : 1.0;
    sc.flushing_expected = false;
    sc.notes = "pure diffusion";
  } else {
    throw Error(Errc::config, "unknown scenario '" + name + "' (valid: flushing, blowup, heat)");
  }
  return sc;
}

FitResult fit_log_cost(const std::vector<SweepRow>& rows) {
  if (rows.size() < 3) throw Error(Errc::invalid_argument, "fit_log_cost needs at least 3 rows");
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (!(r.K > 0.0)) throw Error(Errc::domain_error, "fit_log_cost needs K > 0");
    x.push_back(1.0 / r.epsilon);
    y.push_back(std::log(r.K));
  }
  return least_squares(x, y);
}

std::string classify_sweep(const std::vector<SweepRow>& rows, const FitResult& fit, double* slope_tol, double* ratio) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows) {
    lo = std::min(lo, std::log(r.K));
    hi = std::max(hi, std::log(r.K));
  }
  double st = 0.05 * (hi - lo);
  double rt = std::exp(hi - lo);
  if (slope_tol) *slope_tol = st;
  if (ratio) *ratio = rt;
  if (std::abs(fit.slope) <= st && rt <= kRatioTol) return "bounded";
  if (fit.slope >= kSlopeMin && fit.r2 >= kR2Min) return "blowup";
  return "inconclusive";
}

int required_nx(const Scenario& sc, double eps_min) {
  double width = sc.domain.shape.bbox_hi().x - sc.domain.shape.bbox_lo().x;
  double b = sc.field.bounds().b;
  if (b <= 0.0) return 8;
  return static_cast<int>(std::ceil(width * b / eps_min - 1e-9));
}

int scenario_nt(const Scenario& sc, int nx, int nt_override) {
  double width = sc.domain.shape.bbox_hi().x - sc.domain.shape.bbox_lo().x;
  double h = width / nx;
  int nt = cfl_steps(sc.T, h, sc.field.bounds().b);
  if (sc.field.bounds().b <= 0.0) nt = std::max(nt, static_cast<int>(std::ceil(sc.T / 0.05)));
  return nt_override > 0 ? nt_override : nt;
}

SweepResult run_sweep(const Scenario& sc, const std::vector<double>& eps_list, const SweepOptions& opts) {
  if (eps_list.size() < 3) throw Error(Errc::invalid_argument, "run_sweep needs at least 3 epsilons");
  for (size_t k = 1; k < eps_list.size(); ++k)
    if (!(eps_list[k] < eps_list[k - 1]))
      throw Error(Errc::invalid_argument, "run_sweep needs a strictly decreasing epsilon list");
  int need = required_nx(sc, eps_list.back());
  if (opts.nx < need)
    throw Error(Errc::resolution_too_coarse, "nx=" + std::to_string(opts.nx) + " too coarse for eps_min=" +
                                                 std::to_string(eps_list.back()) + "; need nx >= " +
                                                 std::to_string(need));
  Grid grid = build_grid(sc.domain, opts.nx);
  SweepResult res;
  res.scenario = sc.name;
  res.nx = opts.nx;
  res.nt = scenario_nt(sc, opts.nx, opts.nt);
  res.h = grid.h;
  res.T = sc.T;
  res.dt = sc.T / res.nt;
  res.estimator = opts.estimator == Estimator::family ? "family" : "power";
  TimeGrid tg{sc.T, res.nt, 0.0};
  for (double eps : eps_list) {
    GramianHandle handle(sc.field, grid, tg, eps, opts.scheme);
    SweepRow row;
    row.epsilon = eps;
    if (opts.estimator == Estimator::family) {
      auto fe = family_cost(handle, sc.family);
      row.K = fe.estimate.K;
      row.mu = fe.estimate.mu;
      row.iterations = fe.estimate.iterations;
      row.residual = fe.estimate.residual;
      row.delta = 0.0;
    } else {
      double delta = opts.delta_rel * handle.trace_scale(opts.seed);
      auto est = estimate_cost(handle, delta, opts.tol, opts.max_iter, opts.seed);
      auto est10 = estimate_cost(handle, 0.1 * delta, opts.tol, opts.max_iter, opts.seed);
      row.K = est.K;
      row.mu = est.mu;
      row.iterations = est.iterations;
      row.residual = est.residual;
      row.delta = delta;
      row.K_delta_tenth = est10.K;
    }
    res.rows.push_back(row);
  }
  res.fit = fit_log_cost(res.rows);
  res.verdict = classify_sweep(res.rows, *res.fit, &res.slope_tol, &res.ratio);
  return res;
}

Eigen::VectorXd random_terminal_data(const Grid& grid, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(grid.size());
  for (int c = 0; c < grid.size(); ++c) v[c] = nd(rng);
  v.array() -= v.mean();
  return v;
}

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

CarlemanRatioReport carleman_ratio(const Scenario& sc, double epsilon, double lambda, double s_multiplier, int nx,
                                   int n_data, unsigned seed, double s1, double lambda1,
                                   const std::vector<Eigen::VectorXd>* data) {
  Grid grid = build_grid(sc.domain, nx);
  Region wp = sc.domain.control;
  if (wp.kind == Region::Kind::disk) wp = Region::disk(wp.center, 0.5 * wp.r_out);
  EtaWeight eta = build_eta(grid, wp);
  double BT = compute_BT(sc.field);
  CarlemanParams p = CarlemanParams::from_rule(epsilon, sc.T, BT, lambda, s_multiplier, s1, lambda1);
  if (6.0 * lambda > 700.0) throw Error(Errc::parameter_overflow, "lambda exceeds the overflow guard");
  CarlemanRatioReport rep;
  rep.s = p.s;
  rep.lambda = lambda;
  rep.admissible = p.admissible();
  TimeGrid tg{sc.T, scenario_nt(sc, nx), 0.0};
  Scheme scheme(sc.field, grid, tg, epsilon);
  double h = grid.h, dt = tg.dt(), T = sc.T;
  const double ninf = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  rep.log_lhs = ninf;
  rep.log_rhs = ninf;
  double e6 = std::exp(6 * lambda);
  int count = data ? static_cast<int>(data->size()) : n_data;
  for (int q = 0; q < count; ++q) {
    Eigen::VectorXd phiT = data ? (*data)[q] : random_terminal_data(grid, seed + q);
    double la = ninf, lg = ninf, lr = ninf;
    march_adjoint(scheme, phiT, nullptr, [&](int n, const Eigen::VectorXd& phi) {
      if (n == 0 || n == tg.nt) return;
      double t = tg.time(n);
      double qt = t * (T - t);
      for (int c = 0; c < grid.size(); ++c) {
        double ep = std::exp(4 * lambda + lambda * eta.values[c]);
        double alpha = (e6 - ep) / qt, xi = ep / qt;
        double w = -2.0 * p.s * alpha;
        if (phi[c] != 0.0) {
          double term = w + 3.0 * std::log(xi) + 2.0 * std::log(std::abs(phi[c]));
          la = log_add(la, term);
          if (grid.omega_mask[c]) lr = log_add(lr, term);
        }
        int e = grid.neighbor(c, face_east), wv = grid.neighbor(c, face_west);
        int nn = grid.neighbor(c, face_north), sv = grid.neighbor(c, face_south);
        double gx = (e >= 0 && wv >= 0) ? (phi[e] - phi[wv]) / (2 * h)
                    : e >= 0            ? (phi[e] - phi[c]) / h
                    : wv >= 0           ? (phi[c] - phi[wv]) / h
                                        : 0.0;
        double gy = (nn >= 0 && sv >= 0) ? (phi[nn] - phi[sv]) / (2 * h)
                    : nn >= 0            ? (phi[nn] - phi[c]) / h
                    : sv >= 0            ? (phi[c] - phi[sv]) / h
                                         : 0.0;
        double g2 = gx * gx + gy * gy;
        if (g2 > 0.0) lg = log_add(lg, w + std::log(xi) + std::log(g2));
      }
    });
    double base = std::log(h * h * dt);
    double pref = std::log(p.s * p.s * lambda * lambda);
    double lhs = log_add(pref + base + la, base + lg);
    double rhs = pref + base + lr;
    if (lhs == ninf) continue;
    double r = std::exp(lhs - rhs);
    if (r > worst || rep.log_lhs == ninf) {
      worst = std::max(worst, r);
      rep.log_lhs = lhs;
      rep.log_rhs = rhs;
    }
  }
  rep.ratio = worst;
  return rep;
}

WindowReport observability_window_check(const Scenario& sc, const std::vector<double>& eps_list, double kappa, int nx,
                                        int n_data, unsigned seed) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(Errc::invalid_argument, "kappa must satisfy 0 < kappa < 1");
  Grid grid = build_grid(sc.domain, nx);
  TimeGrid tg{sc.T, scenario_nt(sc, nx), 0.0};
  WindowReport rep;
  rep.rows.resize(eps_list.size());
  double h2 = grid.h * grid.h, dt = tg.dt();
  for (size_t k = 0; k < eps_list.size(); ++k) {
    Scheme scheme(sc.field, grid, tg, eps_list[k]);
    double worst = 0.0;
    for (int q = 0; q < n_data; ++q) {
      Eigen::VectorXd phiT = random_terminal_data(grid, seed + q);
      double top = 0.0, obs = 0.0;
      march_adjoint(scheme, phiT, nullptr, [&](int n, const Eigen::VectorXd& phi) {
        if (tg.time(n) <= kappa * sc.T) top = std::max(top, h2 * phi.squaredNorm());
        if (n == 0) return;
        double s = 0.0;
        for (int c = 0; c < grid.size(); ++c)
          if (grid.omega_mask[c]) s += phi[c] * phi[c];
        obs += dt * h2 * s;
      });
      worst = std::max(worst, top / obs);
    }
    rep.rows[k] = {eps_list[k], worst};
  }
  if (rep.rows.size() >= 3) {
    std::vector<double> x, y;
    for (const auto& r : rep.rows) {
      x.push_back(1.0 / r.epsilon);
      y.push_back(std::log(r.R));
    }
    rep.fit = least_squares(x, y);
  }
  return rep;
}

DissipationSetup dissipation_setup(const std::string& field_name, int nx) {
  Scenario fl = make_scenario("flushing");
  Region disk = fl.domain.shape;
  auto shrunk = shrink_target(fl.field, disk, fl.domain.control, 2.0 * fl.T0, fl.T0, fl.r0);
  DissipationSetup ds;
  ds.omega0 = shrunk.region;
  ds.T0 = fl.T0;
  DomainSpec dom{disk, fl.domain.control, ds.omega0};
  ds.grid = build_grid(dom, nx);
  if (field_name == "spiral") {
    ds.field = fl.field;
  } else if (field_name == "rotation") {
    ds.field = VectorField::rotation();
    ds.field.compute_bounds(disk);
  } else {
    throw Error(Errc::invalid_argument, "dissipation field must be spiral or rotation");
  }
  ds.g.resize(ds.grid.size());
  for (int c = 0; c < ds.grid.size(); ++c) {
    Vec2 x = ds.grid.centers[c];
    double v;
    if (field_name == "spiral") {
      Vec2 d = x - Vec2{-0.6, 0.0};
      v = std::exp(-dot(d, d) / (2 * 0.04 * 0.04));
    } else {
      double r = norm(x);
      v = smoothstep((r - 0.7) / 0.1) * smoothstep((0.98 - r) / 0.1);
    }
    ds.g[c] = ds.grid.obstacle_mask[c] ? 0.0 : v;
  }
  ds.nt = cfl_steps(ds.T0, ds.grid.h, ds.field.bounds().b);
  return ds;
}

DecayTable run_dissipation(const std::string& field_name, int nx, const std::vector<double>& eps_list) {
  DissipationSetup ds = dissipation_setup(field_name, nx);
  return dissipation_decay(ds.field, ds.grid, ds.nt, eps_list, ds.T0, ds.T0, ds.g);
}

}  // namespace tdc
