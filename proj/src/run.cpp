#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "tdc/config.hpp"
#include "tdc/experiments.hpp"

namespace tdc {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

ojson vec_json(Vec2 v) { return ojson::array({v.x, v.y}); }

ojson region_json(const Region& r) {
  ojson j;
  switch (r.kind) {
    case Region::Kind::disk:
      j["kind"] = "disk";
      j["center"] = vec_json(r.center);
      j["radius"] = r.r_out;
      break;
    case Region::Kind::annulus:
      j["kind"] = "annulus";
      j["center"] = vec_json(r.center);
      j["inner"] = r.r_in;
      j["outer"] = r.r_out;
      break;
    case Region::Kind::rectangle:
      j["kind"] = "rectangle";
      j["lo"] = vec_json(r.lo);
      j["hi"] = vec_json(r.hi);
      break;
  }
  return j;
}

ojson domain_json(const DomainSpec& d) {
  ojson j;
  j["shape"] = region_json(d.shape);
  j["control"] = region_json(d.control);
  j["obstacle"] = d.obstacle ? region_json(*d.obstacle) : ojson(nullptr);
  return j;
}

ojson fit_json(const FitResult& f) {
  return ojson{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error(Errc::io, "cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error(Errc::io, "write failed for '" + p.string() + "'");
}

void write_json(const fs::path& p, ojson j, const RunConfig& cfg) {
  j["config"] = ojson::parse(config_to_json(cfg));
  j["generated_at"] = timestamp();
  write_text(p, j.dump(2) + "\n");
}

void write_trajectory(const fs::path& p, const Trajectory& tr) {
  std::ostringstream s;
  s << "t,x1,x2\n";
  for (size_t k = 0; k < tr.t.size(); ++k) s << fmt(tr.t[k]) << ',' << fmt(tr.x[k].x) << ',' << fmt(tr.x[k].y) << '\n';
  write_text(p, s.str());
}

// Rows i, j, t_index, value for every active cell and snapshot.
void write_grid_csv(const fs::path& p, const Grid& grid, const std::vector<std::pair<int, Eigen::VectorXd>>& snaps) {
  std::ostringstream s;
  s << "i,j,t_index,value\n";
  for (const auto& [k, v] : snaps)
    for (int c = 0; c < grid.size(); ++c) s << grid.ci[c] << ',' << grid.cj[c] << ',' << k << ',' << fmt(v[c]) << '\n';
  write_text(p, s.str());
}

ScenarioOptions scenario_options(const RunConfig& cfg) {
  ScenarioOptions o;
  o.rho_hat = cfg.rho_hat;
  o.T = cfg.T;
  return o;
}

SchemeOptions scheme_options(const RunConfig& cfg) {
  SchemeOptions o;
  o.solver = cfg.linear_solver == "cg" ? LinearSolver::cg : LinearSolver::direct;
  return o;
}

void print_table(std::ostream& out, const std::vector<CheckLine>& lines) {
  for (const auto& l : lines) {
    out << (l.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(40) << l.name << std::right << "  "
        << std::setw(14) << std::setprecision(6) << l.value;
    if (!l.detail.empty()) out << "  " << l.detail;
    out << '\n';
  }
}

ojson checks_json(const std::vector<CheckLine>& lines) {
  ojson a = ojson::array();
  for (const auto& l : lines) a.push_back({{"name", l.name}, {"pass", l.pass}, {"value", l.value}, {"detail", l.detail}});
  return a;
}

bool all_pass(const std::vector<CheckLine>& lines) {
  for (const auto& l : lines)
    if (!l.pass) return false;
  return true;
}

int cmd_flow_check(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  Scenario sc = make_scenario(cfg.scenario, scenario_options(cfg));
  const Region& shape = sc.domain.shape;
  const Region& target = sc.domain.control;
  ojson j;
  j["scenario"] = sc.name;
  j["field"] = sc.field.name();
  j["domain"] = domain_json(sc.domain);
  j["flushing_expected"] = sc.flushing_expected;

  double T0 = cfg.T0, r0 = cfg.r0;
  std::optional<Trajectory> escape_witness;
  std::string estimate = "config";
  if (T0 <= 0.0 || r0 <= 0.0) {
    try {
      auto est = estimate_T0_r0(sc.field, shape, target, 0.0, cfg.n_space);
      if (T0 <= 0.0) T0 = est.T0;
      if (r0 <= 0.0) r0 = est.r0;
      estimate = "estimated";
      j["max_entry"] = est.max_entry;
      j["worst_point"] = vec_json(est.worst_point);
    } catch (const NoFlushingError& e) {
      escape_witness = e.witness();
      estimate = "no flushing";
      j["estimate_error"] = e.what();
      if (T0 <= 0.0) T0 = M_PI;
      if (r0 <= 0.0) r0 = 0.05;
    }
  }
  FlushingReport rep = check_flushing(sc.field, shape, target, 2.0 * T0, T0, r0, cfg.n_space, cfg.n_time, cfg.n_ball);
  bool flushing = rep.satisfied;
  j["T0_source"] = estimate;
  j["classification"] = flushing ? "flushing" : "no flushing";
  j["satisfied"] = rep.satisfied;
  j["T0"] = rep.T0;
  j["r0"] = rep.r0;
  j["inset"] = rep.inset;
  j["violation_count"] = rep.violation_count;
  j["sample_count"] = rep.samples.size();

  std::vector<std::string> files;
  ojson samples = ojson::array();
  int wcount = 0;
  for (const auto& s : rep.samples) {
    ojson e;
    e["x0"] = vec_json(s.x0);
    e["t0"] = s.t0;
    e["entry_time"] = s.entry_time ? ojson(*s.entry_time) : ojson(nullptr);
    if (s.witness && wcount < 8) {
      std::string name = "witness_" + sc.name + "_" + std::to_string(wcount++) + ".csv";
      write_trajectory(dir / name, *s.witness);
      e["witness"] = name;
      files.push_back(name);
    }
    samples.push_back(e);
  }
  if (escape_witness) {
    std::string name = "witness_" + sc.name + "_estimate.csv";
    write_trajectory(dir / name, *escape_witness);
    files.push_back(name);
    j["estimate_witness"] = name;
  }
  j["samples"] = samples;
  write_json(dir / ("flow_" + sc.name + ".json"), j, cfg);

  out << "scenario " << sc.name << ": " << (flushing ? "flushing" : "no flushing") << " (T0=" << rep.T0
      << ", r0=" << rep.r0 << ", violations=" << rep.violation_count << "/" << rep.samples.size() << ")\n";
  bool ok = flushing == sc.flushing_expected;
  out << (ok ? "PASS" : "FAIL") << "  classification matches expectation ("
      << (sc.flushing_expected ? "flushing" : "no flushing") << ")\n";
  return ok ? 0 : 1;
}

std::vector<CheckLine> weight_checks(const std::string& tag, const Grid& grid, const Region& omega_prime,
                                     const VectorField& field, const RunConfig& cfg, double T,
                                     std::vector<std::pair<int, Eigen::VectorXd>>* eta_dump) {
  std::vector<CheckLine> lines;
  EtaWeight eta = build_eta(grid, omega_prime);
  for (auto l : check_eta(grid, eta)) {
    l.name = tag + " " + l.name;
    lines.push_back(l);
  }
  if (eta_dump) eta_dump->push_back({0, eta.values});
  double BT = compute_BT(field);
  int nt = 20;
  TimeGrid tg{T, nt, 0.0};
  for (double lambda : {2.0, 4.0}) {
    CarlemanParams p = CarlemanParams::from_rule(cfg.epsilon, T, BT, lambda, cfg.s_multiplier, cfg.s1, cfg.lambda1);
    CarlemanWeights w = build_carleman(eta, p, tg);
    for (auto l : check_carleman(grid, eta, p, w, tg)) {
      l.name = tag + " " + l.name;
      lines.push_back(l);
    }
  }
  return lines;
}

int cmd_verify_weights(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  Scenario sc = make_scenario(cfg.scenario, scenario_options(cfg));
  std::vector<CheckLine> lines;
  std::vector<std::pair<int, Eigen::VectorXd>> eta_dump;

  Grid grid = build_grid(sc.domain, cfg.nx);
  Region wp = sc.domain.control;
  if (wp.kind == Region::Kind::disk) wp = Region::disk(wp.center, 0.5 * wp.r_out);
  std::string tag = sc.name;
  if (!wp.contains(sc.domain.shape.center)) {
    wp = Region::disk(sc.domain.shape.center, 0.3);
    tag += "[omega'=B(c,0.3)]";
  }
  auto a = weight_checks(tag, grid, wp, sc.field, cfg, sc.T, &eta_dump);
  lines.insert(lines.end(), a.begin(), a.end());

  DomainSpec square{Region::rectangle({0, 0}, {1, 1}), Region::disk({0.5, 0.5}, 0.25), std::nullopt};
  Grid sq = build_grid(square, cfg.nx);
  VectorField sq_field = sc.field;
  sq_field.compute_bounds(square.shape, sc.T);
  auto b = weight_checks("square", sq, Region::disk({0.5, 0.5}, 0.125), sq_field, cfg, sc.T, nullptr);
  lines.insert(lines.end(), b.begin(), b.end());

  double t2 = std::min(sc.T, 1.0);
  TimeGrid ttg{t2, std::max(20, static_cast<int>(std::ceil(t2 / grid.h))), 0.0};
  Vec2 x0 = sc.domain.control.center;
  double r = 0.5 * (sc.domain.control.kind == Region::Kind::rectangle
                        ? 0.5 * std::min(sc.domain.control.hi.x - sc.domain.control.lo.x,
                                         sc.domain.control.hi.y - sc.domain.control.lo.y)
                        : sc.domain.control.r_out);
  ThetaWeight theta = build_theta(sc.field, x0, r, 0.0, t2, grid, ttg);
  ThetaReport tr = verify_theta(theta, sc.field, grid);
  lines.push_back({"theta inequality (grid nodes)", tr.hard_violations == 0, tr.min_lhs,
                   "tol " + fmt(tr.tol) + ", violations " + std::to_string(tr.hard_violations) + "/" +
                       std::to_string(tr.nodes)});
  lines.push_back({"theta vanishes outside the tube", tr.tube_violations == 0, double(tr.tube_violations), ""});
  lines.push_back({"theta floor near the trajectory", tr.floor_violations == 0, double(tr.floor_violations), ""});

  print_table(out, lines);
  bool ok = all_pass(lines);
  ojson j;
  j["scenario"] = sc.name;
  j["checks"] = checks_json(lines);
  j["theta"] = {{"x0", vec_json(x0)}, {"r", r},           {"t1", 0.0},        {"t2", t2},
                {"K", theta.K},       {"c0", theta.c0},   {"t_star", theta.t_star}, {"soft_excess", tr.soft_excess}};
  j["pass"] = ok;
  write_json(dir / ("weights_" + sc.name + ".json"), j, cfg);
  if (cfg.dump_csv) {
    write_grid_csv(dir / ("eta_" + sc.name + ".csv"), grid, eta_dump);
    std::vector<std::pair<int, Eigen::VectorXd>> snaps;
    for (int k = 0; k <= ttg.nt; k += std::max(1, ttg.nt / 4)) snaps.push_back({k, theta.values.col(k)});
    write_grid_csv(dir / ("theta_" + sc.name + ".csv"), grid, snaps);
  }
  return ok ? 0 : 1;
}

int cmd_verify_solver(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  Scenario sc = make_scenario(cfg.scenario, scenario_options(cfg));
  double T = cfg.T > 0.0 ? cfg.T : 1.0;
  Grid grid = build_grid(sc.domain, cfg.nx);
  int nt = cfg.nt > 0 ? cfg.nt : cfl_steps(T, grid.h, sc.field.bounds().b);
  if (sc.field.bounds().b == 0.0) nt = std::max(nt, static_cast<int>(std::ceil(T / 0.05)));
  TimeGrid tg{T, nt, 0.0};
  double eps = cfg.epsilon;
  GramianHandle gh = make_gramians(sc.field, grid, tg, eps, scheme_options(cfg));
  const Scheme& scheme = gh.scheme();
  double h2 = grid.h * grid.h;
  std::vector<CheckLine> lines;

  Eigen::VectorXd phiT = random_terminal_data(grid, cfg.seed);
  for (int c = 0; c < grid.size(); ++c) phiT[c] += 1.0;
  AdjointSolution sol = solve_adjoint(scheme, phiT);

  double m0 = integrate(grid, sol.phi[0]), mT = integrate(grid, sol.phi[nt]);
  double mdrift = std::abs(m0 - mT) / std::max(1e-300, integrate(grid, phiT.cwiseAbs()));
  lines.push_back({"mass conservation", mdrift <= 1e-10, mdrift, "relative drift"});

  EnergyReport er = energy_decay_check(sol, grid, sc.field);
  lines.push_back({"energy inequality", er.pass, er.relative_excess, "relative excess"});

  std::mt19937_64 rng(cfg.seed + 1);
  std::normal_distribution<double> nd;
  Eigen::VectorXd y0(grid.size());
  for (int c = 0; c < grid.size(); ++c) y0[c] = nd(rng);
  std::vector<Eigen::VectorXd> u(nt, Eigen::VectorXd::Zero(grid.size()));
  for (auto& un : u)
    for (int c = 0; c < grid.size(); ++c)
      if (grid.omega_mask[c]) un[c] = nd(rng);
  auto y = solve_forward(scheme, y0, &u);
  double lhs = h2 * (y[nt].dot(sol.phi[nt]) - y[0].dot(sol.phi[0]));
  double rhs = control_pairing(grid, tg, u, sol.phi);
  double dual = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  lines.push_back({"duality identity", dual <= 1e-10, dual, "relative gap"});

  Eigen::VectorXd v = random_terminal_data(grid, cfg.seed + 2), w = random_terminal_data(grid, cfg.seed + 3);
  double d1 = gh.inner_M(gh.apply_A0(v), w), d2 = gh.inner_M(v, gh.apply_A0_adjoint(w));
  double g1 = std::abs(d1 - d2) / std::max({std::abs(d1), std::abs(d2), 1e-300});
  lines.push_back({"adjoint dot product (A0)", g1 <= 1e-10, g1, "relative gap"});
  auto wv = gh.apply_Aw(w);
  double e1 = gh.inner_omegaT(gh.apply_Aw(v), wv), e2 = gh.inner_M(v, gh.apply_Aw_adjoint(wv));
  double g2 = std::abs(e1 - e2) / std::max({std::abs(e1), std::abs(e2), 1e-300});
  lines.push_back({"adjoint dot product (A_omega)", g2 <= 1e-10, g2, "relative gap"});

  Eigen::VectorXd z0(grid.size());
  for (int c = 0; c < grid.size(); ++c) {
    Vec2 d = grid.centers[c] - Vec2{-0.3, 0.2};
    z0[c] = std::exp(-dot(d, d) / 0.02);
  }
  auto z = solve_forward(scheme, z0, nullptr);
  double zmin = z0.minCoeff(), zmax = z0.maxCoeff(), over = 0.0;
  for (const auto& zn : z) over = std::max({over, zn.maxCoeff() - zmax, zmin - zn.minCoeff()});
  lines.push_back({"maximum principle (forward)", over <= 1e-12 * zmax, over, "max overshoot"});

  AgmonReport ag = agmon_check(sc.field, grid, tg, eps, phiT, nullptr);
  lines.push_back({"Agmon inequality (theta = 0)", ag.pass, ag.max_excess, "tol " + fmt(ag.tolerance)});

  print_table(out, lines);
  bool ok = all_pass(lines);
  ojson j;
  j["scenario"] = sc.name;
  j["epsilon"] = eps;
  j["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"h", grid.h}, {"cells", grid.size()}};
  j["time"] = {{"T", T}, {"nt", nt}, {"dt", tg.dt()}};
  j["scheme"] = {{"flux", sol.scheme.flux}, {"integrator", sol.scheme.integrator}, {"linear_solver", cfg.linear_solver}};
  j["checks"] = checks_json(lines);
  j["pass"] = ok;
  write_json(dir / ("solver_" + sc.name + ".json"), j, cfg);
  if (cfg.dump_csv) {
    std::vector<std::pair<int, Eigen::VectorXd>> snaps;
    for (int k : {0, nt / 2, nt}) snaps.push_back({k, sol.phi[k]});
    write_grid_csv(dir / ("phi_" + sc.name + ".csv"), grid, snaps);
  }
  return ok ? 0 : 1;
}

int cmd_cost_sweep(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  Scenario sc = make_scenario(cfg.scenario, scenario_options(cfg));
  SweepOptions so;
  so.nx = cfg.nx;
  so.nt = cfg.nt;
  so.delta_rel = cfg.delta;
  so.tol = cfg.tol;
  so.max_iter = cfg.max_iter;
  so.seed = cfg.seed;
  so.estimator = cfg.estimator == "power" ? Estimator::power : Estimator::family;
  so.scheme = scheme_options(cfg);
  SweepResult res = run_sweep(sc, cfg.epsilon_list, so);

  std::ostringstream csv;
  csv << "epsilon,K,mu,iterations,residual,delta\n";
  for (const auto& r : res.rows)
    csv << fmt(r.epsilon) << ',' << fmt(r.K) << ',' << fmt(r.mu) << ',' << r.iterations << ',' << fmt(r.residual)
        << ',' << fmt(r.delta) << '\n';
  write_text(dir / ("sweep_" + sc.name + ".csv"), csv.str());

  ojson rows = ojson::array();
  for (const auto& r : res.rows) {
    ojson e{{"epsilon", r.epsilon}, {"K", r.K},           {"mu", r.mu},
            {"iterations", r.iterations}, {"residual", r.residual}, {"delta", r.delta}};
    if (r.K_delta_tenth > 0.0) e["K_delta_tenth"] = r.K_delta_tenth;
    rows.push_back(e);
  }
  ojson j;
  j["scenario"] = sc.name;
  j["rows"] = rows;
  j["fit"] = res.fit ? fit_json(*res.fit) : ojson(nullptr);
  j["verdict"] = res.verdict;
  j["thresholds"] = {{"slope_tol", res.slope_tol}, {"ratio", res.ratio}, {"ratio_tol", kRatioTol},
                     {"slope_min", kSlopeMin}, {"r2_min", kR2Min}};
  ojson prov;
  prov["field"] = sc.field.name();
  prov["domain"] = domain_json(sc.domain);
  prov["flushing_expected"] = sc.flushing_expected;
  prov["T0"] = sc.T0;
  prov["r0"] = sc.r0;
  prov["notes"] = sc.notes;
  prov["grid"] = {{"nx", res.nx}, {"h", res.h}};
  prov["time"] = {{"T", res.T}, {"nt", res.nt}, {"dt", res.dt}};
  prov["scheme"] = {{"flux", SchemeInfo{}.flux}, {"integrator", SchemeInfo{}.integrator},
                    {"linear_solver", cfg.linear_solver}};
  prov["estimator"] = res.estimator;
  if (so.estimator == Estimator::family)
    prov["family"] = {{"sigma", sc.family.sigma}, {"spacing", sc.family.spacing}, {"margin", sc.family.margin}};
  j["provenance"] = prov;
  write_json(dir / ("sweep_" + sc.name + ".json"), j, cfg);

  out << "scenario " << sc.name << " (" << res.estimator << ", nx=" << res.nx << ", nt=" << res.nt << ", T=" << res.T
      << ")\n";
  out << "epsilon        K              ln K\n";
  for (const auto& r : res.rows)
    out << std::left << std::setw(14) << r.epsilon << ' ' << std::setw(14) << r.K << ' ' << std::log(r.K) << '\n';
  if (res.fit) out << "fit: slope " << res.fit->slope << ", R^2 " << res.fit->r2 << '\n';
  out << "verdict: " << res.verdict << '\n';
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate_config(cfg);
    if (cfg.subcommand.empty()) throw Error(Errc::config, "no subcommand given");
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::io, "cannot create output directory '" + cfg.output_dir + "': " + ec.message());
    write_text(dir / "config_effective.json", config_to_json(cfg) + "\n");
    if (cfg.subcommand == "flow-check") return cmd_flow_check(cfg, dir, out);
    if (cfg.subcommand == "verify-weights") return cmd_verify_weights(cfg, dir, out);
    if (cfg.subcommand == "verify-solver") return cmd_verify_solver(cfg, dir, out);
    return cmd_cost_sweep(cfg, dir, out);
  } catch (const Error& e) {
    err << "error [" << errc_name(e.code()) << "]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace tdc
