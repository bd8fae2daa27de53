#include <cmath>

#include "doctest.h"
#include "tdc/error.hpp"
#include "tdc/weights.hpp"

using namespace tdc;

namespace {

Grid disk_grid(int nx) {
  return build_grid({Region::disk({0, 0}, 1.0), Region::disk({0, 0}, 0.5), std::nullopt}, nx);
}

bool all_pass(const std::vector<CheckLine>& lines) {
  for (const auto& l : lines)
    if (!l.pass) return false;
  return true;
}

}  // namespace

TEST_CASE("eta on the unit disk") {
  Grid g = disk_grid(96);
  EtaWeight eta = build_eta(g, Region::disk({0, 0}, 0.3));
  CHECK(eta.values.maxCoeff() == doctest::Approx(1.0).epsilon(g.h * g.h));
  CHECK(eta.delta == doctest::Approx(0.6).epsilon(0.05));
  for (int c = 0; c < g.size(); ++c) {
    double r = norm(g.centers[c]);
    CHECK(eta.values[c] == doctest::Approx(1 - r * r));
    CHECK(eta.values[c] > 0);
  }
  for (const auto& f : g.boundary_faces) CHECK(eta.values[f.cell] <= 2 * g.h);
  CHECK(all_pass(check_eta(g, eta)));
}

TEST_CASE("eta on the unit square") {
  Grid g = build_grid({Region::rectangle({0, 0}, {1, 1}), Region::disk({0.5, 0.5}, 0.25), std::nullopt}, 32);
  EtaWeight eta = build_eta(g, Region::disk({0.5, 0.5}, 0.125));
  int imax;
  eta.values.maxCoeff(&imax);
  CHECK(norm(g.centers[imax] - Vec2{0.5, 0.5}) <= g.h);
  for (const auto& f : g.boundary_faces) CHECK(eta.values[f.cell] <= 2 * g.h);
  CHECK(all_pass(check_eta(g, eta)));
}

TEST_CASE("eta needs the critical point inside omega'") {
  Grid g = disk_grid(32);
  CHECK_THROWS_AS(build_eta(g, Region::disk({0.6, 0}, 0.1)), Error);
}

TEST_CASE("B_T constant") {
  VectorField z = VectorField::zero();
  z.compute_bounds(Region::disk({0, 0}, 1.0));
  CHECK(compute_BT(z) == doctest::Approx(1.0));
  VectorField rot = VectorField::rotation();
  rot.compute_bounds(Region::disk({0, 0}, 1.0));
  CHECK(compute_BT(rot) == doctest::Approx(3 + std::sqrt(2.0)));
  VectorField c = VectorField::constant({2, 0});
  c.compute_bounds(Region::disk({0, 0}, 1.0));
  CHECK(compute_BT(c) == doctest::Approx(3 + std::sqrt(2.0)));
}

TEST_CASE("Carleman parameter rule") {
  auto p = CarlemanParams::from_rule(0.1, 1.0, 2.0, 2.0, 1.0);
  CHECK(p.s == doctest::Approx(10.0 * 2.0 * 2.0));
  CHECK(p.admissible());
  CHECK_FALSE(p.diagnostic);
  auto q = CarlemanParams::from_rule(0.1, 1.0, 2.0, 2.0, 0.01);
  CHECK_FALSE(q.admissible());
  CHECK(q.diagnostic);
}

TEST_CASE("Carleman weights") {
  Grid g = disk_grid(48);
  EtaWeight eta = build_eta(g, Region::disk({0, 0}, 0.25));
  double T = 1.0;
  TimeGrid tg{T, 10, 0.0};
  for (double lambda : {2.0, 4.0}) {
    auto p = CarlemanParams::from_rule(0.1, T, 3.0, lambda, 1.0);
    CarlemanWeights w = build_carleman(eta, p, tg);
    CHECK(w.alpha_plus.cols() == 9);
    CHECK(all_pass(check_carleman(g, eta, p, w, tg)));
    int mid = 4;  // t = T/2
    CHECK(w.times[mid] == doctest::Approx(T / 2));
    for (int c = 0; c < g.size(); c += 17) {
      double e = eta.values[c];
      CHECK(w.xi_plus(c, mid) == doctest::Approx(4 * std::exp(4 * lambda + lambda * e) / (T * T)));
      CHECK(w.xi_minus(c, mid) / w.xi_plus(c, mid) == doctest::Approx(std::exp(-2 * lambda * e)));
      for (int k = 0; k < 9; ++k) CHECK(w.alpha_plus(c, k) <= w.alpha_minus(c, k));
    }
  }
  auto big = CarlemanParams::from_rule(0.1, T, 3.0, 200.0, 1.0);
  CHECK_THROWS_AS(build_carleman(eta, big, tg), Error);
}

TEST_CASE("smoothstep") {
  CHECK(smoothstep(0.0) == 0.0);
  CHECK(smoothstep(1.0) == 1.0);
  CHECK(smoothstep(-1.0) == 0.0);
  CHECK(smoothstep(2.0) == 1.0);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5));
  double best = 0;
  for (int k = 1; k <= 100000; ++k) {
    double u = k / 100000.0;
    double d = 30 * u * u * (u - 1) * (u - 1);
    best = std::max(best, d * d / smoothstep(u));
  }
  CHECK(smoothstep_ratio_max() == doctest::Approx(best).epsilon(1e-4));
}

TEST_CASE("theta for the zero field") {
  VectorField z = VectorField::zero();
  Grid g = disk_grid(48);
  z.compute_bounds(g.domain.shape);
  TimeGrid tg{1.0, 48, 0.0};
  ThetaWeight th = build_theta(z, {0, 0}, 0.2, 0.0, 1.0, g, tg);
  for (int c = 0; c < g.size(); ++c) {
    double r = norm(g.centers[c]);
    if (r < 0.2) CHECK(th.values(c, 10) == 0.0);
    if (r > 0.4) CHECK(th.values(c, 10) >= th.c0 * 0.04 * (1 - 1e-12));
    for (int k = 1; k <= tg.nt; ++k) CHECK(th.values(c, k) >= th.values(c, k - 1));
  }
  ThetaReport rep = verify_theta(th, z, g);
  CHECK(rep.hard_violations == 0);
  CHECK(rep.min_lhs >= -rep.tol);
  CHECK(rep.tube_violations == 0);
  CHECK(rep.floor_violations == 0);
}

TEST_CASE("theta for the spiral follows the flow") {
  VectorField sp = VectorField::spiral(1.0);
  Grid g = disk_grid(48);
  sp.compute_bounds(g.domain.shape);
  TimeGrid tg{1.0, 48, 0.0};
  ThetaWeight th = build_theta(sp, {0.3, 0}, 0.15, 0.0, 1.0, g, tg);
  ThetaReport rep = verify_theta(th, sp, g);
  CHECK(rep.hard_violations == 0);
  CHECK(rep.tube_violations == 0);
  CHECK(rep.floor_violations == 0);
}

TEST_CASE("verify_theta on explicit candidates") {
  VectorField z = VectorField::zero();
  Grid g = disk_grid(32);
  z.compute_bounds(g.domain.shape);
  TimeGrid tg{1.0, 32, 0.0};
  ThetaWeight th = build_theta(z, {0, 0}, 0.2, 0.0, 1.0, g, tg);
  th.values.setZero();
  th.K = 0.0;
  ThetaReport zero = verify_theta(th, z, g);
  CHECK(zero.hard_violations == 0);
  CHECK(zero.min_lhs == doctest::Approx(0.0));
  for (int c = 0; c < g.size(); ++c)
    for (int k = 0; k <= tg.nt; ++k) th.values(c, k) = tg.time(k) * dot(g.centers[c], g.centers[c]);
  ThetaReport bad = verify_theta(th, z, g);
  CHECK(bad.hard_violations > 0);
}
