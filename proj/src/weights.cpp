#include "tdc/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tdc/error.hpp"
#include "tdc/flow.hpp"
#include "tdc/parallel.hpp"

namespace tdc {

namespace {

double eta_formula(const Region& shape, Vec2 p) {
  if (shape.kind == Region::Kind::disk) {
    Vec2 d = p - shape.center;
    return 1.0 - dot(d, d) / (shape.r_out * shape.r_out);
  }
  double w = shape.hi.x - shape.lo.x, hgt = shape.hi.y - shape.lo.y;
  return 16.0 * (p.x - shape.lo.x) * (shape.hi.x - p.x) * (p.y - shape.lo.y) * (shape.hi.y - p.y) /
         (w * w * hgt * hgt);
}

bool is_boundary_cell(const Grid& g, int c) {
  for (int d = 0; d < 4; ++d)
    if (g.neighbor(c, d) < 0) return true;
  return false;
}

}  // namespace

EtaWeight build_eta(const Grid& grid, const Region& omega_prime) {
  const Region& shape = grid.domain.shape;
  if (!omega_prime.contains(shape.center))
    throw Error(Errc::unsupported_geometry, "omega' must contain the critical point of the eta formula");
  EtaWeight e;
  e.omega_prime = omega_prime;
  int n = grid.size();
  e.values.resize(n);
  e.gx.resize(n);
  e.gy.resize(n);
  double h = grid.h;
  e.delta = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n; ++c) {
    Vec2 p = grid.centers[c];
    e.values[c] = eta_formula(shape, p);
    e.gx[c] = (eta_formula(shape, p + Vec2{h, 0}) - eta_formula(shape, p - Vec2{h, 0})) / (2 * h);
    e.gy[c] = (eta_formula(shape, p + Vec2{0, h}) - eta_formula(shape, p - Vec2{0, h})) / (2 * h);
    if (!omega_prime.contains(p)) e.delta = std::min(e.delta, std::hypot(e.gx[c], e.gy[c]));
  }
  return e;
}

double compute_BT(const VectorField& field) {
  const FieldBounds& b = field.bounds();
  return 1.0 + b.b + b.div + b.L + std::sqrt(b.b) + std::sqrt(b.div) + std::cbrt(b.div * b.div) + std::sqrt(b.dtB);
}

CarlemanParams CarlemanParams::from_rule(double epsilon, double T, double BT, double lambda, double multiplier,
                                         double s1, double lambda1) {
  CarlemanParams p;
  p.epsilon = epsilon;
  p.T = T;
  p.BT = BT;
  p.lambda = lambda;
  p.s1 = s1;
  p.lambda1 = lambda1;
  p.s = multiplier * p.s_threshold();
  p.diagnostic = multiplier < 1.0;
  return p;
}

CarlemanWeights build_carleman(const EtaWeight& eta, const CarlemanParams& params, const TimeGrid& tg) {
  tg.validate();
  if (!params.admissible() && !params.diagnostic)
    throw Error(Errc::invalid_argument, "Carleman parameters are not admissible and not flagged diagnostic");
  double lam = params.lambda;
  double eta_max = eta.values.size() ? eta.values.cwiseAbs().maxCoeff() : 0.0;
  if (6.0 * lam > 700.0 || lam * eta_max > 700.0)
    throw Error(Errc::parameter_overflow, "lambda*eta exceeds the overflow guard");
  CarlemanWeights w;
  int n = static_cast<int>(eta.values.size());
  int m = tg.nt - 1;
  w.alpha_plus.resize(n, m);
  w.alpha_minus.resize(n, m);
  w.xi_plus.resize(n, m);
  w.xi_minus.resize(n, m);
  double T = params.T;
  double e6 = std::exp(6 * lam);
  for (int k = 0; k < m; ++k) {
    double t = tg.time(k + 1) - tg.t_begin;
    w.times.push_back(t);
    double q = t * (T - t);
    for (int c = 0; c < n; ++c) {
      double ep = std::exp(4 * lam + lam * eta.values[c]);
      double em = std::exp(4 * lam - lam * eta.values[c]);
      w.alpha_plus(c, k) = (e6 - ep) / q;
      w.alpha_minus(c, k) = (e6 - em) / q;
      w.xi_plus(c, k) = ep / q;
      w.xi_minus(c, k) = em / q;
    }
  }
  return w;
}

std::vector<CheckLine> check_eta(const Grid& grid, const EtaWeight& eta) {
  std::vector<CheckLine> out;
  double h = grid.h;
  double min_interior = std::numeric_limits<double>::infinity(), max_boundary = 0.0;
  double min_grad = std::numeric_limits<double>::infinity();
  for (int c = 0; c < grid.size(); ++c) {
    if (is_boundary_cell(grid, c))
      max_boundary = std::max(max_boundary, eta.values[c]);
    else
      min_interior = std::min(min_interior, eta.values[c]);
    if (!eta.omega_prime.contains(grid.centers[c]))
      min_grad = std::min(min_grad, std::hypot(eta.gx[c], eta.gy[c]));
  }
  double mx = eta.values.maxCoeff();
  out.push_back({"eta positive at interior cells", min_interior > 0.0, min_interior, ""});
  out.push_back({"eta <= 2h at boundary cells", max_boundary <= 2 * h, max_boundary, ""});
  out.push_back({"max eta = 1 (within h^2)", mx <= 1.0 && mx >= 1.0 - 2 * h * h, mx, ""});
  out.push_back({"|grad eta| >= delta > 0 outside omega'", eta.delta > 0.0 && min_grad >= eta.delta, eta.delta, ""});
  return out;
}

std::vector<CheckLine> check_carleman(const Grid& grid, const EtaWeight& eta, const CarlemanParams& params,
                                      const CarlemanWeights& w, const TimeGrid& tg) {
  (void)tg;
  double lam = params.lambda, T = params.T;
  double floor = 4.0 * std::exp(3 * lam) / (T * T);
  double eta_tol = 2 * grid.h;
  double gap_rel_tol = 2.0 * std::sinh(lam * eta_tol) * std::exp(4 * lam) / (std::exp(6 * lam) - std::exp(4 * lam + lam * eta_tol));
  int bad_xi = 0, bad_alpha = 0, bad_floor = 0, bad_boundary = 0;
  double worst_gap = 0.0;
  for (int k = 0; k < w.xi_plus.cols(); ++k)
    for (int c = 0; c < w.xi_plus.rows(); ++c) {
      if (!(w.xi_minus(c, k) <= w.xi_plus(c, k))) ++bad_xi;
      if (!(w.alpha_plus(c, k) <= w.alpha_minus(c, k))) ++bad_alpha;
      if (!(w.xi_minus(c, k) >= floor * (1 - 1e-12) && w.xi_plus(c, k) >= floor * (1 - 1e-12))) ++bad_floor;
      if (is_boundary_cell(grid, c)) {
        double rel = std::abs(w.alpha_plus(c, k) - w.alpha_minus(c, k)) / std::abs(w.alpha_plus(c, k));
        double rel_xi = std::abs(w.xi_plus(c, k) - w.xi_minus(c, k)) / w.xi_plus(c, k);
        worst_gap = std::max(worst_gap, rel);
        if (rel > gap_rel_tol * (1 + 1e-9) || rel_xi > 2 * std::sinh(lam * eta_tol) + 1e-12) ++bad_boundary;
      }
    }
  (void)eta;
  std::string tag = " (lambda=" + std::to_string(static_cast<int>(lam)) + ")";
  return {
      {"xi- <= xi+" + tag, bad_xi == 0, static_cast<double>(bad_xi), ""},
      {"alpha+ <= alpha-" + tag, bad_alpha == 0, static_cast<double>(bad_alpha), ""},
      {"alpha+ = alpha-, xi+ = xi- on boundary cells" + tag, bad_boundary == 0, worst_gap, ""},
      {"xi >= 4 e^{3 lambda}/T^2" + tag, bad_floor == 0, static_cast<double>(bad_floor), ""},
  };
}

double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

namespace {

double ratio(double u) {
  // S'^2/S = 900 u (1-u)^4 / (6u^2 - 15u + 10)
  return 900.0 * u * std::pow(1.0 - u, 4) / (6.0 * u * u - 15.0 * u + 10.0);
}

}  // namespace

double smoothstep_ratio_max() {
  static const double value = [] {
    double best = 0.0, arg = 0.0;
    for (int k = 1; k < 100000; ++k) {
      double u = k / 100000.0;
      if (ratio(u) > best) {
        best = ratio(u);
        arg = u;
      }
    }
    double a = std::max(0.0, arg - 1e-5), b = std::min(1.0, arg + 1e-5);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      double c = b - g * (b - a), d = a + g * (b - a);
      if (ratio(c) > ratio(d))
        b = d;
      else
        a = c;
    }
    return std::max(best, ratio(0.5 * (a + b)));
  }();
  return value;
}

double ThetaWeight::evaluate(Vec2 x, double t) const {
  Vec2 psi = flow_point(field, x, t, t2, step);
  double u = (norm(psi - x0) - r) / r;
  return f(t) * smoothstep(u);
}

ThetaWeight build_theta(const VectorField& field_in, Vec2 x0, double r, double t1, double t2, const Grid& grid,
                        const TimeGrid& tg) {
  if (!(t1 < t2)) throw Error(Errc::invalid_argument, "build_theta needs t1 < t2");
  if (!(r > 0.0)) throw Error(Errc::invalid_argument, "build_theta needs r > 0");
  tg.validate();
  ThetaWeight th;
  th.field = field_in;
  if (!th.field.has_bounds()) th.field.compute_bounds(grid.domain.shape, t2);
  th.x0 = x0;
  th.r = r;
  th.t1 = t1;
  th.t2 = t2;
  th.timegrid = TimeGrid{t2 - t1, tg.nt, t1};
  double L = th.field.bounds().L;
  double smax = smoothstep_ratio_max();
  th.lipschitz_psi = std::exp(L * (t2 - t1));
  th.K = th.lipschitz_psi * th.lipschitz_psi * smax / (r * r);
  th.t_star = t2 + (t2 - t1);
  th.c0 = 1.0 / (2.0 * th.K * (t2 - t1) * r * r);
  double dt = th.timegrid.dt();
  int sub = std::max(1, static_cast<int>(std::ceil(dt / default_step(th.field) - 1e-9)));
  th.step = dt / sub;
  double fmax = th.f(t2);
  const double s1max = 15.0 / 8.0, s2max = 10.0 / std::sqrt(3.0);
  double lp2 = th.lipschitz_psi * th.lipschitz_psi;
  th.lipschitz = fmax * s1max * th.lipschitz_psi / r;
  th.curvature_scale = fmax * (s2max * lp2 / (r * r) + s1max * lp2 * std::max(L, 1.0) / r) +
                       2.0 * th.K * th.K * fmax * fmax * fmax;
  int nt = tg.nt;
  int n = grid.size();
  th.values.resize(n, nt + 1);
  parallel_for(n, [&](int c) {
    for (int k = 0; k <= nt; ++k) {
      Vec2 x = grid.centers[c];
      for (int m = k; m < nt; ++m)
        for (int q = 0; q < sub; ++q) x = rk4_step(th.field, x, th.timegrid.time(m) + q * th.step, th.step);
      double u = (norm(x - x0) - r) / r;
      th.values(c, k) = th.f(th.timegrid.time(k)) * smoothstep(u);
    }
  });
  return th;
}

ThetaReport verify_theta(const ThetaWeight& theta, const VectorField& field, const Grid& grid, int n_fresh) {
  ThetaReport rep;
  const TimeGrid& tg = theta.timegrid;
  double dt = tg.dt(), h = grid.h;
  rep.tol = 10.0 * (h * h + dt * dt) * theta.curvature_scale;
  rep.min_lhs = std::numeric_limits<double>::infinity();
  for (int c = 0; c < grid.size(); ++c) {
    int e = grid.neighbor(c, face_east), w = grid.neighbor(c, face_west);
    int nn = grid.neighbor(c, face_north), s = grid.neighbor(c, face_south);
    if (e < 0 || w < 0 || nn < 0 || s < 0) continue;
    for (int k = 1; k < tg.nt; ++k) {
      double th_t = (theta.values(c, k + 1) - theta.values(c, k - 1)) / (2 * dt);
      double gx = (theta.values(e, k) - theta.values(w, k)) / (2 * h);
      double gy = (theta.values(nn, k) - theta.values(s, k)) / (2 * h);
      Vec2 b = field(grid.centers[c], tg.time(k));
      double lhs = th_t - (gx * gx + gy * gy) + b.x * gx + b.y * gy;
      rep.min_lhs = std::min(rep.min_lhs, lhs);
      if (lhs < -rep.tol) ++rep.hard_violations;
      ++rep.nodes;
    }
  }
  rep.soft_excess = std::max(0.0, -rep.min_lhs);
  if (theta.K > 0.0 && n_fresh > 0) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const Region& shape = grid.domain.shape;
    for (int q = 0; q < n_fresh; ++q) {
      double t = theta.t1 + (theta.t2 - theta.t1) * uni(rng);
      double a = 2 * M_PI * uni(rng);
      double rad = 0.999 * theta.r * std::sqrt(uni(rng));
      Vec2 y = theta.x0 + Vec2{rad * std::cos(a), rad * std::sin(a)};
      Vec2 x = flow_point(theta.field, y, theta.t2, t, theta.step);
      if (theta.evaluate(x, t) != 0.0) ++rep.tube_violations;
      double rad2 = 2.0 * theta.r * 1.001 + 0.5 * uni(rng);
      Vec2 z = theta.x0 + Vec2{rad2 * std::cos(a), rad2 * std::sin(a)};
      if (!shape.contains(z)) continue;
      Vec2 xz = flow_point(theta.field, z, theta.t2, t, theta.step);
      if (theta.evaluate(xz, t) < theta.c0 * theta.r * theta.r * (1 - 1e-9)) ++rep.floor_violations;
    }
  }
  return rep;
}

}  // namespace tdc
