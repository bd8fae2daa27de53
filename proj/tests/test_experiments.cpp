#include <cmath>

#include "doctest.h"
#include "tdc/error.hpp"
#include "tdc/experiments.hpp"

using namespace tdc;

namespace {

std::vector<SweepRow> rows_from(const std::vector<double>& eps, double (*K)(double)) {
  std::vector<SweepRow> rows;
  for (double e : eps) {
    SweepRow r;
    r.epsilon = e;
    r.K = K(e);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("fit of exact exponential data") {
  auto rows = rows_from({0.5, 0.25, 0.2, 0.1}, [](double e) { return std::exp(3.0 / e); });
  auto fit = fit_log_cost(rows);
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(classify_sweep(rows, fit) == "blowup");

  auto r2 = rows_from({0.5, 0.25, 0.1}, [](double e) { return std::exp(2.0 / e + 1.0); });
  auto f2 = fit_log_cost(r2);
  CHECK(f2.slope == doctest::Approx(2.0));
  CHECK(f2.intercept == doctest::Approx(1.0));
}

TEST_CASE("constant cost is bounded") {
  auto rows = rows_from({0.1, 0.05, 0.025}, [](double) { return 7.0; });
  auto fit = fit_log_cost(rows);
  CHECK(fit.slope == doctest::Approx(0.0));
  CHECK(fit.r2 == 0.0);
  double tol = -1, ratio = -1;
  CHECK(classify_sweep(rows, fit, &tol, &ratio) == "bounded");
  CHECK(ratio == doctest::Approx(1.0));
}

TEST_CASE("noisy moderate growth is inconclusive") {
  auto rows = rows_from({0.1, 0.05, 0.033, 0.025}, [](double e) { return std::exp(0.2 / e) * (e > 0.04 ? 1.0 : 3.0); });
  auto fit = fit_log_cost(rows);
  CHECK(classify_sweep(rows, fit) == "inconclusive");
}

TEST_CASE("fit guards") {
  auto two = rows_from({0.1, 0.05}, [](double) { return 1.0; });
  CHECK_THROWS_AS(fit_log_cost(two), Error);
  auto zero = rows_from({0.1, 0.05, 0.02}, [](double) { return 0.0; });
  CHECK_THROWS_AS(fit_log_cost(zero), Error);
}

TEST_CASE("scenarios") {
  Scenario bl = make_scenario("blowup");
  CHECK(bl.T == 0.5);
  CHECK_FALSE(bl.flushing_expected);
  CHECK(required_nx(bl, 0.025) == 80);
  CHECK(scenario_nt(bl, 96) == 48);
  Scenario heat = make_scenario("heat");
  CHECK(scenario_nt(heat, 96) == 20);
  CHECK_THROWS_AS(make_scenario("nope"), Error);
  CHECK_THROWS_AS(make_scenario("blowup", {6.0, 3.0}), Error);
  Scenario fl = make_scenario("flushing", {2.0, 0.0});
  CHECK(fl.flushing_expected);
  CHECK(fl.T == doctest::Approx(2.0 * fl.T0));
}

TEST_CASE("sweep guards") {
  Scenario bl = make_scenario("blowup");
  SweepOptions so;
  so.nx = 40;
  try {
    run_sweep(bl, {0.1, 0.05, 0.025}, so);
    FAIL("expected resolution_too_coarse");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::resolution_too_coarse);
    CHECK(std::string(e.what()).find("80") != std::string::npos);
  }
  CHECK_THROWS_AS(run_sweep(bl, {0.05, 0.1, 0.2}, so), Error);
  CHECK_THROWS_AS(run_sweep(bl, {0.2, 0.1}, so), Error);
}

TEST_CASE("small blowup sweep grows with 1/epsilon") {
  Scenario bl = make_scenario("blowup");
  SweepOptions so;
  so.nx = 48;
  auto res = run_sweep(bl, {0.2, 0.1, 0.05}, so);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.rows[0].K < res.rows[1].K);
  CHECK(res.rows[1].K < res.rows[2].K);
  CHECK(res.fit->slope > 0);
}

TEST_CASE("power estimator sweep reports the delta sensitivity") {
  Scenario heat = make_scenario("heat", {6.0, 0.25});
  SweepOptions so;
  so.nx = 16;
  so.estimator = Estimator::power;
  so.delta_rel = 1e-6;
  auto res = run_sweep(heat, {1.0, 0.5, 0.25}, so);
  for (const auto& r : res.rows) {
    CHECK(r.K > 0);
    CHECK(r.K_delta_tenth >= r.K * (1 - 1e-8));
  }
}

TEST_CASE("Carleman diagnostic ratio") {
  Scenario fl = make_scenario("flushing", {6.0, 1.0});
  auto a = carleman_ratio(fl, 0.1, 2.0, 1.0, 32);
  auto b = carleman_ratio(fl, 0.05, 2.0, 1.0, 32);
  CHECK(std::isfinite(a.ratio));
  CHECK(std::isfinite(b.ratio));
  CHECK(a.admissible);
  CHECK(std::abs(std::log(a.ratio / b.ratio)) <= std::log(10.0));
  Grid g = build_grid(fl.domain, 32);
  std::vector<Eigen::VectorXd> zero{Eigen::VectorXd::Zero(g.size())};
  CHECK(carleman_ratio(fl, 0.1, 2.0, 1.0, 32, 1, 42, 1.0, 2.0, &zero).ratio == 0.0);
}

TEST_CASE("observability window") {
  Scenario fl = make_scenario("flushing", {6.0, 1.0});
  CHECK_THROWS_AS(observability_window_check(fl, {0.1, 0.05, 0.025}, 1.0, 32), Error);
  Scenario all = fl;
  all.domain.control = all.domain.shape;
  double kappa = 0.5;
  auto rep = observability_window_check(all, {0.2, 0.1, 0.05}, kappa, 32, 2);
  for (const auto& r : rep.rows) CHECK(r.R <= 1.0 / (all.T * (1 - kappa)) * 1.5);
}

TEST_CASE("random terminal data has zero mean") {
  Scenario fl = make_scenario("heat");
  Grid g = build_grid(fl.domain, 32);
  auto v = random_terminal_data(g, 3);
  CHECK(std::abs(v.sum()) < 1e-9 * v.norm() * g.size());
  CHECK((random_terminal_data(g, 3) - v).norm() == 0.0);
}
