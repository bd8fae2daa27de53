#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tdc.h"

namespace {

int fail(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, tdc_last_error());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport-diffusion controllability toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string scenario, output_dir, estimator, eps_list;
  int nx = 0, nt = 0;
  double T = 0.0;

  for (const char* name : {"flow-check", "verify-weights", "verify-solver", "cost-sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", sets, "override key=value (repeatable)");
    sub->add_option("-s,--scenario", scenario, "flushing | blowup | heat");
    sub->add_option("-o,--output-dir", output_dir, "directory for artifacts");
    sub->add_option("--nx", nx, "cells across the bounding box");
    sub->add_option("--nt", nt, "time steps (0: CFL default)");
    sub->add_option("-T,--horizon", T, "time horizon");
    sub->add_option("--epsilon-list", eps_list, "comma-separated decreasing epsilons");
    sub->add_option("--estimator", estimator, "family | power");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  tdc_config* cfg = tdc_config_create();
  if (!cfg) return 2;
  int status = 2;
  auto set = [&](const char* key, const std::string& value) { return tdc_config_set(cfg, key, value.c_str()); };
  do {
    if (!config_path.empty() && tdc_config_load_file(cfg, config_path.c_str()) != TDC_OK) {
      status = fail("config");
      break;
    }
    bool ok = set("subcommand", app.get_subcommands().front()->get_name()) == TDC_OK;
    if (ok && !scenario.empty()) ok = set("scenario", scenario) == TDC_OK;
    if (ok && !output_dir.empty()) ok = set("output_dir", output_dir) == TDC_OK;
    if (ok && !estimator.empty()) ok = set("estimator", estimator) == TDC_OK;
    if (ok && !eps_list.empty()) ok = set("epsilon_list", eps_list) == TDC_OK;
    if (ok && nx > 0) ok = set("nx", std::to_string(nx)) == TDC_OK;
    if (ok && nt > 0) ok = set("nt", std::to_string(nt)) == TDC_OK;
    if (ok && T > 0.0) ok = set("T", std::to_string(T)) == TDC_OK;
    for (const auto& kv : sets) {
      if (!ok) break;
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
        ok = false;
        break;
      }
      ok = set(kv.substr(0, eq).c_str(), kv.substr(eq + 1)) == TDC_OK;
    }
    if (!ok) {
      if (*tdc_last_error()) fail("config");
      break;
    }
    status = tdc_run(cfg);
  } while (false);
  tdc_config_destroy(cfg);
  return status;
}
