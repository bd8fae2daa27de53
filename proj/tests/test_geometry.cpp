#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "tdc/geometry.hpp"
#include "tdc/error.hpp"
#include "tdc/parallel.hpp"

using namespace tdc;

namespace {

DomainSpec unit_disk(double control_r = 0.5) {
  return {Region::disk({0, 0}, 1.0), Region::disk({0, 0}, control_r), std::nullopt};
}

}  // namespace

TEST_CASE("region membership and distances") {
  Region d = Region::disk({0, 0}, 1.0);
  CHECK(d.contains({0.5, 0.5}));
  CHECK_FALSE(d.contains({1.0, 0.0}));
  CHECK(d.contains_closed({1.0, 0.0}));
  CHECK(d.signed_distance({0.25, 0.0}) == doctest::Approx(0.75));
  CHECK(d.signed_distance({2.0, 0.0}) == doctest::Approx(-1.0));
  Vec2 p = d.project_to_boundary({0.3, 0.4});
  CHECK(p.x == doctest::Approx(0.6));
  CHECK(p.y == doctest::Approx(0.8));
  CHECK(d.area() == doctest::Approx(M_PI));
  CHECK(d.diameter() == doctest::Approx(2.0));

  Region a = Region::annulus({0, 0}, 0.5, 1.0);
  CHECK(a.contains({0.75, 0.0}));
  CHECK_FALSE(a.contains({0.2, 0.0}));
  CHECK(a.signed_distance({0.75, 0}) == doctest::Approx(0.25));

  Region r = Region::rectangle({0, 0}, {2, 1});
  CHECK(r.contains({1.0, 0.5}));
  CHECK(r.signed_distance({1.0, 0.25}) == doctest::Approx(0.25));
  CHECK(r.area() == doctest::Approx(2.0));
  CHECK(Region::disk({0, 0}, 0.3).inside_of(d));
  CHECK_FALSE(Region::disk({0.9, 0}, 0.3).inside_of(d));
}

TEST_CASE("erosion") {
  Region d = Region::disk({0, 0}, 1.0).eroded(0.25);
  CHECK(d.r_out == doctest::Approx(0.75));
  Region r = Region::rectangle({0, 0}, {1, 1}).eroded(0.1);
  CHECK(r.lo.x == doctest::Approx(0.1));
  CHECK(r.hi.y == doctest::Approx(0.9));
  CHECK_THROWS_AS(Region::disk({0, 0}, 0.1).eroded(0.2), Error);
}

TEST_CASE("grid on the unit disk") {
  Grid g = build_grid(unit_disk(), 64);
  double expected = M_PI / 4 * 64 * 64;
  CHECK(std::abs(g.size() - expected) / expected < 0.02);
  int omega = g.count(g.omega_mask);
  CHECK(std::abs(omega - 0.25 * g.size()) / (0.25 * g.size()) < 0.05);
  for (int c = 0; c < g.size(); ++c) CHECK(g.domain.shape.contains(g.centers[c]));
}

TEST_CASE("grid on the unit square") {
  DomainSpec sq{Region::rectangle({0, 0}, {1, 1}), Region::disk({0.5, 0.5}, 0.25), std::nullopt};
  Grid g = build_grid(sq, 16);
  CHECK(g.size() == 256);
  CHECK(g.boundary_faces.size() == 64);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(g.size());
  CHECK(std::abs(integrate(g, one) - 1.0) <= g.h);
  CHECK(integrate(g, Eigen::VectorXd::Zero(g.size())) == 0.0);
}

TEST_CASE("indicator of omega integrates to its area") {
  Grid g = build_grid(unit_disk(), 96);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(g.size());
  double area = integrate(g, one, g.omega_mask);
  CHECK(std::abs(area - M_PI * 0.25) < 4 * M_PI * 0.5 * g.h);
}

TEST_CASE("neighbors are symmetric") {
  Grid g = build_grid(unit_disk(), 24);
  for (int c = 0; c < g.size(); ++c) {
    int e = g.neighbor(c, face_east);
    if (e >= 0) CHECK(g.neighbor(e, face_west) == c);
    int n = g.neighbor(c, face_north);
    if (n >= 0) CHECK(g.neighbor(n, face_south) == c);
  }
}

TEST_CASE("grid guards") {
  CHECK_THROWS_AS(build_grid(unit_disk(), 4), Error);
  try {
    build_grid(unit_disk(0.01), 8);
    FAIL("expected geometry_too_coarse");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::geometry_too_coarse);
  }
}

TEST_CASE("obstacle cells are marked") {
  DomainSpec d = unit_disk();
  d.obstacle = Region::disk({0, 0}, 0.3);
  Grid g = build_grid(d, 48);
  int obs = g.count(g.obstacle_mask);
  double expected = M_PI * 0.09 / (g.h * g.h);
  CHECK(std::abs(obs - expected) / expected < 0.1);
}

TEST_CASE("time grid") {
  TimeGrid tg{2.0, 8, 1.0};
  CHECK(tg.dt() == doctest::Approx(0.25));
  CHECK(tg.time(0) == 1.0);
  CHECK(tg.time(8) == 3.0);
}

TEST_CASE("worker pool") {
  setenv("TDC_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](int k) { hit[k] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, [](int k) {
                    if (k == 7) throw Error(Errc::invalid_argument, "boom");
                  }),
                  Error);
  setenv("TDC_WORKERS", "bogus", 1);
  CHECK(worker_count() >= 1);
  unsetenv("TDC_WORKERS");
}
