#include "tdc/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdc/parallel.hpp"

namespace tdc {

namespace {

VectorField with_bounds(const VectorField& field, const Region& domain, double T) {
  if (field.has_bounds()) return field;
  VectorField f = field;
  f.compute_bounds(domain, T);
  return f;
}

struct EscapeBox {
  bool active = false;
  Vec2 lo, hi;

  explicit EscapeBox(const VectorField& field) {
    if (!field.bounds_domain()) return;
    const Region& d = *field.bounds_domain();
    double pad = d.diameter();
    lo = d.bbox_lo() - Vec2{pad, pad};
    hi = d.bbox_hi() + Vec2{pad, pad};
    active = true;
  }

  void check(Vec2 p) const {
    if (!active) return;
    if (!(p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y))
      throw Error(Errc::escape, "trajectory left the bounding box by more than one diameter");
  }
};

int step_count(double span, double step) {
  if (!(step > 0.0)) throw Error(Errc::invalid_argument, "integrator step must be positive");
  return std::max(1, static_cast<int>(std::ceil(std::abs(span) / step - 1e-9)));
}

}  // namespace

double default_step(const VectorField& field) {
  double b = field.bounds().b;
  return b > 0.0 ? std::min(0.01, 0.1 / b) : 0.01;
}

Vec2 rk4_step(const VectorField& field, Vec2 x, double t, double dt) {
  Vec2 k1 = field(x, t);
  Vec2 k2 = field(x + (0.5 * dt) * k1, t + 0.5 * dt);
  Vec2 k3 = field(x + (0.5 * dt) * k2, t + 0.5 * dt);
  Vec2 k4 = field(x + dt * k3, t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec2 flow_point(const VectorField& field, Vec2 x0, double t0, double t1, double step) {
  if (t1 == t0) return x0;
  int n = step_count(t1 - t0, step);
  double dt = (t1 - t0) / n;
  EscapeBox box(field);
  Vec2 x = x0;
  for (int k = 0; k < n; ++k) {
    x = rk4_step(field, x, t0 + k * dt, dt);
    box.check(x);
  }
  return x;
}

Trajectory integrate_flow(const VectorField& field, Vec2 x0, double t0, double t1, double step) {
  Trajectory tr;
  tr.t0 = t0;
  tr.x0 = x0;
  tr.forward = t1 >= t0;
  tr.t.push_back(t0);
  tr.x.push_back(x0);
  if (t1 == t0) {
    tr.step = step;
    return tr;
  }
  int n = step_count(t1 - t0, step);
  double dt = (t1 - t0) / n;
  tr.step = std::abs(dt);
  EscapeBox box(field);
  Vec2 x = x0;
  for (int k = 0; k < n; ++k) {
    x = rk4_step(field, x, t0 + k * dt, dt);
    box.check(x);
    tr.t.push_back(k + 1 == n ? t1 : t0 + (k + 1) * dt);
    tr.x.push_back(x);
  }
  return tr;
}

double gronwall_check(const VectorField& field_in, const std::vector<FlowPair>& pairs, double t, double T,
                      double step) {
  const VectorField& field = field_in;
  const FieldBounds& bd = field.bounds();
  if (step <= 0.0) step = default_step(field);
  double growth = std::exp(bd.L * T);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    Vec2 a = flow_point(field, p.x0, p.t0, t, step);
    Vec2 b = flow_point(field, p.y0, p.s0, t, step);
    double bound = growth * (bd.b * std::abs(p.t0 - p.s0) + norm(p.x0 - p.y0));
    worst = std::max(worst, norm(a - b) - bound);
  }
  return worst;
}

std::vector<Vec2> flushing_points(const Region& domain, int n_space, double* inset_out, double inset) {
  if (n_space < 1) throw Error(Errc::invalid_argument, "n_space must be positive");
  double s = std::sqrt(domain.area() / n_space);
  if (inset < 0.0) inset = 0.5 * s;
  if (inset_out) *inset_out = inset;
  std::vector<Vec2> pts;
  Vec2 lo = domain.bbox_lo(), hi = domain.bbox_hi();
  Vec2 c = domain.center;
  int ilo = static_cast<int>(std::floor((lo.x - c.x) / s)), ihi = static_cast<int>(std::ceil((hi.x - c.x) / s));
  int jlo = static_cast<int>(std::floor((lo.y - c.y) / s)), jhi = static_cast<int>(std::ceil((hi.y - c.y) / s));
  for (int j = jlo; j <= jhi; ++j)
    for (int i = ilo; i <= ihi; ++i) {
      Vec2 p{c.x + i * s, c.y + j * s};
      if (domain.signed_distance(p) >= inset) pts.push_back(p);
    }
  if (domain.kind == Region::Kind::rectangle) {
    Vec2 a{lo.x + inset, lo.y + inset}, b{hi.x - inset, hi.y - inset};
    Vec2 corners[5] = {a, {b.x, a.y}, b, {a.x, b.y}, a};
    for (int e = 0; e < 4; ++e) {
      Vec2 p = corners[e], q = corners[e + 1];
      int m = std::max(1, static_cast<int>(std::ceil(norm(q - p) / s)));
      for (int k = 0; k < m; ++k) pts.push_back(p + (static_cast<double>(k) / m) * (q - p));
    }
  } else {
    double rad = domain.r_out - inset;
    int m = std::max(8, static_cast<int>(std::ceil(2 * M_PI * domain.r_out / s)));
    for (int k = 0; k < m; ++k) {
      double a = 2 * M_PI * k / m;
      pts.push_back(c + Vec2{rad * std::cos(a), rad * std::sin(a)});
    }
  }
  return pts;
}

std::vector<Vec2> ball_points(Vec2 center, double r, int n_ball) {
  std::vector<Vec2> pts{center};
  int rings = 0;
  while (1 + 4 * rings * (rings + 1) < n_ball) ++rings;
  for (int k = 1; k <= rings; ++k) {
    int m = 8 * k;
    double rad = r * k / rings;
    for (int q = 0; q < m; ++q) {
      double a = 2 * M_PI * q / m;
      pts.push_back(center + Vec2{rad * std::cos(a), rad * std::sin(a)});
    }
  }
  return pts;
}

namespace {

// Ball samples inside the inset domain; the center is always kept.
std::vector<Vec2> clipped_ball(const Region& domain, Vec2 x0, double r, int n_ball, double inset) {
  auto all = ball_points(x0, r, n_ball);
  std::vector<Vec2> out{x0};
  for (size_t k = 1; k < all.size(); ++k)
    if (domain.signed_distance(all[k]) >= inset - 1e-12) out.push_back(all[k]);
  return out;
}

// For backward times t0 - k*dt, k = 1..K-1, the minimum signed distance of
// the ball images to the target boundary (positive: all inside).
std::vector<double> ball_clearance(const VectorField& field, const Region& target, const std::vector<Vec2>& ball,
                                   double t0, double T0, double step, double* dt_out) {
  int K = step_count(T0, step);
  double dt = T0 / K;
  if (dt_out) *dt_out = dt;
  std::vector<double> clear(K + 1, std::numeric_limits<double>::infinity());
  EscapeBox box(field);
  for (auto p : ball) {
    Vec2 x = p;
    for (int k = 1; k <= K; ++k) {
      x = rk4_step(field, x, t0 - (k - 1) * dt, -dt);
      box.check(x);
      clear[k] = std::min(clear[k], target.signed_distance(x));
    }
  }
  clear[0] = -std::numeric_limits<double>::infinity();
  clear[K] = -std::numeric_limits<double>::infinity();
  return clear;
}

std::vector<double> sample_times(double T, double T0, int n_time) {
  std::vector<double> ts;
  if (n_time <= 1) return {T0};
  for (int k = 0; k < n_time; ++k) ts.push_back(T0 + (T - T0) * k / (n_time - 1));
  return ts;
}

}  // namespace

FlushingReport check_flushing(const VectorField& field_in, const Region& domain, const Region& target, double T,
                              double T0, double r0, int n_space, int n_time, int n_ball,
                              const FlushingOptions& opts) {
  if (!(T0 > 0.0 && T0 < T)) throw Error(Errc::invalid_argument, "check_flushing needs 0 < T0 < T");
  if (!(r0 > 0.0)) throw Error(Errc::invalid_argument, "check_flushing needs r0 > 0");
  if (n_ball < 25) throw Error(Errc::invalid_argument, "check_flushing needs n_ball >= 25");
  VectorField field = with_bounds(field_in, domain, T);
  double step = opts.step > 0.0 ? opts.step : default_step(field);
  FlushingReport rep;
  rep.T0 = T0;
  rep.r0 = r0;
  auto xs = flushing_points(domain, n_space, &rep.inset, opts.inset);
  auto ts = sample_times(T, T0, n_time);
  rep.samples.resize(xs.size() * ts.size());
  bool autonomous = !field.time_dependent();
  parallel_for(static_cast<int>(xs.size()), [&](int i) {
    auto ball = clipped_ball(domain, xs[i], r0, n_ball, rep.inset);
    for (size_t q = 0; q < ts.size(); ++q) {
      FlushingSample& s = rep.samples[i * ts.size() + q];
      s.x0 = xs[i];
      s.t0 = ts[q];
      if (autonomous && q > 0) {
        const FlushingSample& first = rep.samples[i * ts.size()];
        if (first.entry_time) s.entry_time = *first.entry_time - ts[0] + ts[q];
        if (first.witness) s.witness = integrate_flow(field, xs[i], ts[q], ts[q] - T0, step);
        continue;
      }
      double dt = 0.0;
      auto clear = ball_clearance(field, target, ball, ts[q], T0, step, &dt);
      for (size_t k = 1; k + 1 < clear.size(); ++k)
        if (clear[k] > 0.0) {
          s.entry_time = ts[q] - k * dt;
          break;
        }
      if (!s.entry_time) s.witness = integrate_flow(field, xs[i], ts[q], ts[q] - T0, step);
    }
  });
  for (const auto& s : rep.samples)
    if (!s.entry_time) ++rep.violation_count;
  rep.satisfied = rep.violation_count == 0;
  return rep;
}

FlushingEstimate estimate_T0_r0(const VectorField& field_in, const Region& domain, const Region& target,
                                double step, int n_space, double horizon) {
  if (field_in.time_dependent()) throw Error(Errc::invalid_argument, "estimate_T0_r0 needs an autonomous field");
  VectorField field = with_bounds(field_in, domain, 1.0);
  if (step <= 0.0) step = default_step(field);
  double inset = 0.0;
  auto xs = flushing_points(domain, n_space, &inset);
  int K = step_count(horizon, step);
  double dt = horizon / K;
  std::vector<int> entry(xs.size(), -1);
  parallel_for(static_cast<int>(xs.size()), [&](int i) {
    Vec2 x = xs[i];
    for (int k = 1; k <= K; ++k) {
      x = rk4_step(field, x, -(k - 1) * dt, -dt);
      if (target.contains(x)) {
        entry[i] = k;
        return;
      }
    }
  });
  FlushingEstimate est;
  int worst = -1;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (entry[i] < 0) {
      auto w = integrate_flow(field, xs[i], 0.0, -horizon, step);
      throw NoFlushingError("backward trajectory from (" + std::to_string(xs[i].x) + "," + std::to_string(xs[i].y) +
                                ") never enters the target within the horizon",
                            std::move(w));
    }
    if (worst < 0 || entry[i] > entry[worst]) worst = static_cast<int>(i);
  }
  est.max_entry = entry[worst] * dt;
  est.worst_point = xs[worst];
  est.T0 = 1.1 * est.max_entry;
  std::vector<double> depth(xs.size(), 0.0);
  parallel_for(static_cast<int>(xs.size()), [&](int i) {
    Vec2 x = xs[i];
    int kmax = static_cast<int>(std::floor(est.T0 / dt));
    for (int k = 1; k <= kmax; ++k) {
      x = rk4_step(field, x, -(k - 1) * dt, -dt);
      if (k >= entry[i]) depth[i] = std::max(depth[i], target.signed_distance(x));
    }
  });
  double r0 = 0.5 * *std::min_element(depth.begin(), depth.end());
  for (int attempt = 0; attempt < 30; ++attempt) {
    auto rep = check_flushing(field, domain, target, 2.0 * est.T0, est.T0, r0, n_space, 2, 25,
                              FlushingOptions{step, inset});
    if (rep.satisfied) {
      est.r0 = r0;
      return est;
    }
    r0 *= 0.5;
  }
  throw Error(Errc::no_flushing, "no admissible r0 found for the estimated T0");
}

ShrinkResult shrink_target(const VectorField& field_in, const Region& domain, const Region& target, double T,
                           double T0, double r0, int n_space, int n_time, int n_ball, const FlushingOptions& opts) {
  VectorField field = with_bounds(field_in, domain, T);
  double step = opts.step > 0.0 ? opts.step : default_step(field);
  double inset = 0.0;
  auto xs = flushing_points(domain, n_space, &inset, opts.inset);
  auto ts = sample_times(T, T0, n_time);
  std::vector<double> best(xs.size() * ts.size(), -std::numeric_limits<double>::infinity());
  parallel_for(static_cast<int>(xs.size()), [&](int i) {
    auto ball = clipped_ball(domain, xs[i], 0.5 * r0, n_ball, inset);
    for (size_t q = 0; q < ts.size(); ++q) {
      if (!field.time_dependent() && q > 0) {
        best[i * ts.size() + q] = best[i * ts.size()];
        continue;
      }
      auto clear = ball_clearance(field, target, ball, ts[q], T0, step, nullptr);
      best[i * ts.size() + q] = *std::max_element(clear.begin(), clear.end());
    }
  });
  double d0 = *std::min_element(best.begin(), best.end());
  if (!(d0 > 0.0))
    throw Error(Errc::cannot_shrink, "flushing condition fails for the half-radius ball; nothing to shrink");
  double tol = 1e-3 * domain.diameter();
  if (d0 < tol)
    throw Error(Errc::cannot_shrink, "clearance d0=" + std::to_string(d0) + " is below the geometric tolerance");
  return {target.eroded(0.5 * d0), d0};
}

}  // namespace tdc
