#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "tdc.h"
#include "tdc/config.hpp"
#include "tdc/error.hpp"

using namespace tdc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tdc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(TDC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("defaults for a minimal config") {
  ConfigStore s;
  s.load_text("scenario = blowup\n");
  RunConfig c = parse_config(s);
  CHECK(c.scenario == "blowup");
  CHECK(c.nx == 96);
  CHECK(c.nt == 0);
  CHECK(c.delta == 1e-10);
  CHECK(c.seed == 42u);
}

TEST_CASE("parsing values, comments and lists") {
  ConfigStore s;
  s.load_text("# comment\nnx = 128  # trailing\nepsilon_list = 0.2, 0.1,0.05\ndump_csv = true\n\n");
  RunConfig c = parse_config(s);
  CHECK(c.nx == 128);
  CHECK(c.epsilon_list == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(c.dump_csv);
}

TEST_CASE("unknown keys list the valid ones") {
  ConfigStore s;
  try {
    s.set("nxx", "3");
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
    std::string w = e.what();
    CHECK(w.find("nxx") != std::string::npos);
    CHECK(w.find("epsilon_list") != std::string::npos);
  }
}

TEST_CASE("guards name their precondition") {
  auto fails_with = [](const std::string& text, Errc code, const std::string& needle) {
    ConfigStore s;
    s.load_text(text);
    try {
      parse_config(s);
      return false;
    } catch (const Error& e) {
      return e.code() == code && std::string(e.what()).find(needle) != std::string::npos;
    }
  };
  CHECK(fails_with("epsilon_list = 0.025, 0.05, 0.1", Errc::config, "run_sweep"));
  CHECK(fails_with("scenario = blowup\nnx = 40", Errc::resolution_too_coarse, "nx >= 80"));
  CHECK(fails_with("kappa = 1", Errc::config, "kappa"));
  CHECK(fails_with("nx = 4", Errc::config, "nx >= 8"));
  CHECK(fails_with("estimator = lanczos", Errc::config, "estimator"));
  CHECK(fails_with("nx = abc", Errc::config, "not an integer"));
  CHECK_THROWS_AS(ConfigStore().load_text("no equals sign"), Error);
}

TEST_CASE("config echo is complete json") {
  RunConfig c;
  auto j = nlohmann::json::parse(config_to_json(c));
  for (const auto& k : config_keys()) CHECK(j.contains(k));
}

TEST_CASE("C API config handling") {
  tdc_config* cfg = tdc_config_create();
  REQUIRE(cfg);
  CHECK(tdc_config_set(cfg, "bogus", "1") == TDC_ERR_CONFIG);
  CHECK(std::string(tdc_last_error()).find("valid keys") != std::string::npos);
  CHECK(tdc_config_set(cfg, "nx", "64") == TDC_OK);
  char buf[32];
  CHECK(tdc_config_get(cfg, "nx", buf, sizeof buf) == TDC_OK);
  CHECK(std::string(buf) == "64");
  CHECK(tdc_config_get(cfg, "nt", buf, sizeof buf) == TDC_ERR_CONFIG);
  CHECK(tdc_config_validate(cfg) == TDC_OK);
  CHECK(tdc_config_set(cfg, "epsilon_list", "0.1,0.2,0.3") == TDC_OK);
  CHECK(tdc_config_validate(cfg) == TDC_ERR_CONFIG);
  CHECK(tdc_run(cfg) == 2);
  CHECK(std::string(tdc_status_name(TDC_ERR_RESOLUTION_TOO_COARSE)) == errc_name(Errc::resolution_too_coarse));
  tdc_config_destroy(cfg);
}

TEST_CASE("C API numerics") {
  tdc_field* f = nullptr;
  REQUIRE(tdc_field_create("rotation", 0, 0, &f) == TDC_OK);
  double b1, b2;
  CHECK(tdc_field_eval(f, 1, 0, 0, &b1, &b2) == TDC_OK);
  CHECK(b2 == doctest::Approx(-1.0));
  double y1, y2;
  CHECK(tdc_flow_endpoint(f, 1, 0, 0, M_PI / 2, &y1, &y2) == TDC_OK);
  CHECK(y2 == doctest::Approx(-1.0).epsilon(1e-8));
  tdc_field_destroy(f);
  CHECK(tdc_field_create("nope", 0, 0, &f) == TDC_ERR_INVALID_ARGUMENT);
  double eps[] = {0.5, 0.25, 0.1}, K[] = {std::exp(6.0), std::exp(12.0), std::exp(30.0)};
  double s, i, r2;
  CHECK(tdc_fit_log_cost(eps, K, 3, &s, &i, &r2) == TDC_OK);
  CHECK(s == doctest::Approx(3.0));
  CHECK(tdc_fit_log_cost(eps, K, 2, &s, &i, &r2) == TDC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("verify-solver on defaults passes") {
  fs::path dir = scratch("solver");
  RunConfig c;
  c.subcommand = "verify-solver";
  c.output_dir = dir.string();
  c.dump_csv = true;
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 0);
  CHECK(out.str().find("FAIL") == std::string::npos);
  CHECK(fs::exists(dir / "config_effective.json"));
  auto j = nlohmann::json::parse(slurp(dir / "solver_flushing.json"));
  CHECK(j["pass"] == true);
  CHECK(j["config"]["nx"] == 96);
  CHECK(slurp(dir / "phi_flushing.csv").rfind("i,j,t_index,value\n", 0) == 0);
}

TEST_CASE("flow-check classifies and is deterministic") {
  fs::path dir = scratch("flow");
  RunConfig c;
  c.subcommand = "flow-check";
  c.scenario = "blowup";
  c.output_dir = dir.string();
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 0);
  auto a = nlohmann::json::parse(slurp(dir / "flow_blowup.json"));
  CHECK(a["classification"] == "no flushing");
  CHECK(a["samples"].size() > 0);
  std::string wfile;
  for (const auto& s : a["samples"])
    if (s.contains("witness")) {
      wfile = s["witness"];
      break;
    }
  REQUIRE(!wfile.empty());
  CHECK(slurp(dir / wfile).rfind("t,x1,x2\n", 0) == 0);
  CHECK(run(c, out, err) == 0);
  auto b = nlohmann::json::parse(slurp(dir / "flow_blowup.json"));
  a.erase("generated_at");
  b.erase("generated_at");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("verify-weights dumps weight fields") {
  fs::path dir = scratch("weights");
  RunConfig c;
  c.subcommand = "verify-weights";
  c.scenario = "heat";
  c.nx = 48;
  c.output_dir = dir.string();
  c.dump_csv = true;
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 0);
  CHECK(fs::exists(dir / "eta_heat.csv"));
  CHECK(fs::exists(dir / "theta_heat.csv"));
}

TEST_CASE("verdict failure exits with 1") {
  fs::path dir = scratch("verdict");
  RunConfig c;
  c.subcommand = "flow-check";
  c.scenario = "flushing";
  c.T0 = 0.1;
  c.r0 = 0.01;
  c.n_space = 100;
  c.output_dir = dir.string();
  std::ostringstream out, err;
  CHECK(run(c, out, err) == 1);
  auto j = nlohmann::json::parse(slurp(dir / "flow_flushing.json"));
  CHECK(j["classification"] == "no flushing");
}

TEST_CASE("cost-sweep on the blowup scenario") {
  fs::path dir = scratch("sweep");
  RunConfig c;
  c.subcommand = "cost-sweep";
  c.scenario = "blowup";
  c.output_dir = dir.string();
  std::ostringstream out, err;
  REQUIRE(run(c, out, err) == 0);
  CHECK(slurp(dir / "sweep_blowup.csv").rfind("epsilon,K,mu,iterations,residual,delta\n", 0) == 0);
  auto j = nlohmann::json::parse(slurp(dir / "sweep_blowup.json"));
  CHECK(j["verdict"] == "blowup");
  CHECK(j["rows"].size() == 4);
  CHECK(j["provenance"]["grid"]["nx"] == 96);
  CHECK(j.contains("generated_at"));
}

TEST_CASE("command line exit codes") {
  fs::path dir = scratch("cli");
  CHECK(run_cli("flow-check -s blowup -o " + dir.string()) == 0);
  std::ofstream(dir / "bad.cfg") << "this is not a config\n";
  CHECK(run_cli("verify-solver -c " + (dir / "bad.cfg").string()) == 2);
  CHECK(run_cli("verify-solver --set nope=1") == 2);
  CHECK(run_cli("cost-sweep -s blowup --nx 40 -o " + dir.string()) == 2);
  CHECK(run_cli("no-such-command") == 2);
}
