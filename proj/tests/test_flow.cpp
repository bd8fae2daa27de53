#include <cmath>
#include <random>

#include "doctest.h"
#include "tdc/flow.hpp"

using namespace tdc;

TEST_CASE("field values") {
  VectorField rot = VectorField::rotation();
  Vec2 v = rot({1, 0}, 0);
  CHECK(v.x == doctest::Approx(0.0));
  CHECK(v.y == doctest::Approx(-1.0));
  VectorField sp = VectorField::spiral(1.0);
  Vec2 o = sp({0, 0}, 0);
  CHECK(o.x == doctest::Approx(0.0));
  CHECK(o.y == doctest::Approx(0.0));
  Vec2 w = sp({1, 0}, 0);
  CHECK(w.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.y == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("jacobian matches finite differences") {
  VectorField sp = VectorField::spiral(1.0);
  Vec2 x{0.3, -0.4};
  double h = 1e-6;
  Jacobian J = sp.jacobian(x, 0);
  Vec2 dx = (1.0 / (2 * h)) * (sp({x.x + h, x.y}, 0) - sp({x.x - h, x.y}, 0));
  Vec2 dy = (1.0 / (2 * h)) * (sp({x.x, x.y + h}, 0) - sp({x.x, x.y - h}, 0));
  CHECK(J.a11 == doctest::Approx(dx.x).epsilon(1e-7));
  CHECK(J.a21 == doctest::Approx(dx.y).epsilon(1e-7));
  CHECK(J.a12 == doctest::Approx(dy.x).epsilon(1e-7));
  CHECK(J.a22 == doctest::Approx(dy.y).epsilon(1e-7));
}

TEST_CASE("stream function reproduces the solenoidal part") {
  VectorField sp = VectorField::spiral(1.0);
  Vec2 x{0.2, 0.5};
  double h = 1e-6;
  double d1 = (sp.stream({x.x + h, x.y}) - sp.stream({x.x - h, x.y})) / (2 * h);
  double d2 = (sp.stream({x.x, x.y + h}) - sp.stream({x.x, x.y - h})) / (2 * h);
  Vec2 b = sp(x, 0), r = sp.remainder(x, 0);
  CHECK(b.x - r.x == doctest::Approx(d2).epsilon(1e-7));
  CHECK(b.y - r.y == doctest::Approx(-d1).epsilon(1e-7));
}

TEST_CASE("rotation bounds") {
  VectorField rot = VectorField::rotation();
  rot.compute_bounds(Region::disk({0, 0}, 1.0));
  CHECK(rot.bounds().b == doctest::Approx(1.0));
  CHECK(rot.bounds().L == doctest::Approx(std::sqrt(2.0)));
  CHECK(rot.bounds().div == doctest::Approx(0.0));
  CHECK(default_step(rot) == doctest::Approx(0.01));
}

TEST_CASE("rotation flow") {
  VectorField rot = VectorField::rotation();
  Vec2 y = flow_point(rot, {1, 0}, 0, M_PI / 2, 1e-3);
  CHECK(std::abs(y.x) < 1e-8);
  CHECK(std::abs(y.y + 1) < 1e-8);
  Trajectory tr = integrate_flow(rot, {0.6, 0.2}, 0, 5, 1e-3);
  for (Vec2 p : tr.x) CHECK(std::abs(norm(p) - norm(Vec2{0.6, 0.2})) < 1e-8);
  CHECK(tr.t.back() == doctest::Approx(5.0));
  Trajectory back = integrate_flow(rot, {0.6, 0.2}, 5, 1, 1e-3);
  CHECK(back.t.back() == doctest::Approx(1.0));
}

TEST_CASE("rk4 is fourth order") {
  VectorField rot = VectorField::rotation();
  Vec2 x0{0.5, 0.3};
  auto err = [&](double step) {
    double t = 3.0;
    Vec2 e{x0.x * std::cos(t) + x0.y * std::sin(t), -x0.x * std::sin(t) + x0.y * std::cos(t)};
    return norm(flow_point(rot, x0, 0, t, step) - e);
  };
  double ratio = err(0.1) / err(0.05);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.125));
}

TEST_CASE("constant field flow is a translation") {
  VectorField c = VectorField::constant({1, 0});
  Vec2 y = flow_point(c, {0, 0}, 0, 0.3, 0.01);
  CHECK(y.x == doctest::Approx(0.3));
  CHECK(y.y == doctest::Approx(0.0));
}

TEST_CASE("escape guard") {
  VectorField c = VectorField::constant({1, 0});
  c.compute_bounds(Region::disk({0, 0}, 1.0));
  CHECK_THROWS_AS(flow_point(c, {0, 0}, 0, 10, 0.01), Error);
}

TEST_CASE("gronwall bound") {
  VectorField rot = VectorField::rotation();
  rot.compute_bounds(Region::disk({0, 0}, 1.0));
  std::vector<FlowPair> same{{{0.3, 0.1}, 0.0, {0.3, 0.1}, 0.0}};
  CHECK(gronwall_check(rot, same, 1.0, 1.0) <= 0.0);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-0.7, 0.7), ut(0.0, 1.0);
  std::vector<FlowPair> pairs;
  for (int k = 0; k < 50; ++k) pairs.push_back({{u(rng), u(rng)}, ut(rng), {u(rng), u(rng)}, ut(rng)});
  CHECK(gronwall_check(rot, pairs, 1.0, 1.0) <= 1e-6);
  VectorField c = VectorField::constant({0.5, 0.2});
  c.compute_bounds(Region::disk({0, 0}, 1.0));
  std::vector<FlowPair> cp{{{0.1, 0.1}, 0.0, {0.3, -0.2}, 0.0}};
  CHECK(gronwall_check(c, cp, 1.0, 1.0) < 0.0);
}

TEST_CASE("sampling helpers") {
  Region d = Region::disk({0, 0}, 1.0);
  double inset = 0;
  auto pts = flushing_points(d, 200, &inset);
  CHECK(pts.size() >= 200);
  CHECK(inset > 0);
  for (Vec2 p : pts) CHECK(d.contains_closed(p));
  auto ball = ball_points({0.2, 0.1}, 0.05, 25);
  CHECK(ball.size() >= 25);
  for (Vec2 p : ball) CHECK(norm(p - Vec2{0.2, 0.1}) <= 0.05 + 1e-12);
}

TEST_CASE("spiral satisfies the flushing condition") {
  VectorField sp = VectorField::spiral(1.0);
  Region d = Region::disk({0, 0}, 1.0), target = Region::disk({0, 0}, 0.5);
  sp.compute_bounds(d);
  auto rep = check_flushing(sp, d, target, 20.0, 10.0, 0.02, 200, 2, 25);
  CHECK(rep.satisfied);
  for (const auto& s : rep.samples) CHECK(s.entry_time.has_value());

  auto est = estimate_T0_r0(sp, d, target, 0.0, 200);
  CHECK(std::isfinite(est.T0));
  CHECK(est.r0 > 0);
  CHECK(check_flushing(sp, d, target, 2 * est.T0, est.T0, est.r0, 200, 2, 25).satisfied);

  auto sh = shrink_target(sp, d, target, 2 * est.T0, est.T0, est.r0, 200);
  CHECK(sh.d0 > 0);
  CHECK(sh.region.r_out == doctest::Approx(0.5 - sh.d0 / 2));
  CHECK(check_flushing(sp, d, sh.region, 2 * est.T0, est.T0, est.r0, 200, 2, 25).satisfied);
}

TEST_CASE("rotation violates the flushing condition") {
  VectorField rot = VectorField::rotation();
  Region d = Region::disk({0, 0}, 1.0), target = Region::disk({0.5, 0}, 0.1);
  rot.compute_bounds(d);
  auto rep = check_flushing(rot, d, target, 2 * M_PI, M_PI, 0.02, 100, 2, 25);
  CHECK_FALSE(rep.satisfied);
  bool origin = false;
  for (const auto& s : rep.samples)
    if (norm(s.x0) < 1e-12 && s.witness) {
      origin = true;
      for (Vec2 p : s.witness->x) CHECK(norm(p) < 1e-12);
    }
  CHECK(origin);
  try {
    estimate_T0_r0(rot, d, target, 0.0, 100);
    FAIL("expected no-flushing");
  } catch (const NoFlushingError& e) {
    CHECK(e.code() == Errc::no_flushing);
    CHECK(!e.witness().x.empty());
  }
}

TEST_CASE("constant field crossing a strip") {
  VectorField c = VectorField::constant({-1, 0});
  Region sq = Region::rectangle({0, 0}, {1, 1});
  Region strip = Region::rectangle({0.8, 0}, {1, 1});
  c.compute_bounds(sq);
  auto est = estimate_T0_r0(c, sq, strip, 0.0, 100);
  CHECK(est.T0 == doctest::Approx(1.1 * 0.8).epsilon(0.05));
  auto rep = check_flushing(c, sq, strip, 2 * est.T0, est.T0, est.r0, 100, 2, 25);
  CHECK(rep.satisfied);
  auto sh = shrink_target(c, sq, strip, 2 * est.T0, est.T0, est.r0, 100);
  CHECK(check_flushing(c, sq, sh.region, 2 * est.T0, est.T0, est.r0, 100, 2, 25).satisfied);
}

TEST_CASE("grazing target cannot shrink") {
  VectorField c = VectorField::constant({-1, 0});
  Region sq = Region::rectangle({0, 0}, {1, 1});
  Region strip = Region::rectangle({0.8, 0}, {1, 1});
  c.compute_bounds(sq);
  CHECK_THROWS_AS(shrink_target(c, sq, strip, 2.0, 0.76, 0.05, 100), Error);
}
