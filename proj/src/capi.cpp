#include "tdc.h"

#include <cstring>
#include <iostream>
#include <string>

#include "tdc/config.hpp"
#include "tdc/experiments.hpp"

struct tdc_config {
  tdc::ConfigStore store;
};

struct tdc_field {
  tdc::VectorField field;
};

namespace {

thread_local std::string last_error;

template <class F>
tdc_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return TDC_OK;
  } catch (const tdc::Error& e) {
    last_error = e.what();
    return static_cast<tdc_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return TDC_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw tdc::Error(tdc::Errc::invalid_argument, what);
}

}  // namespace

extern "C" {

const char* tdc_last_error(void) { return last_error.c_str(); }

const char* tdc_status_name(tdc_status status) {
  if (status == TDC_OK) return "ok";
  if (status == TDC_ERR_INTERNAL) return "internal";
  return tdc::errc_name(static_cast<tdc::Errc>(status));
}

tdc_config* tdc_config_create(void) { return new (std::nothrow) tdc_config; }

void tdc_config_destroy(tdc_config* cfg) { delete cfg; }

tdc_status tdc_config_load_file(tdc_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "null argument");
    cfg->store.load_file(path);
  });
}

tdc_status tdc_config_set(tdc_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    cfg->store.set(key, value);
  });
}

tdc_status tdc_config_get(const tdc_config* cfg, const char* key, char* buf, size_t len) {
  return guarded([&] {
    require(cfg && key && buf && len > 0, "null argument");
    if (!cfg->store.has(key)) throw tdc::Error(tdc::Errc::config, std::string("key '") + key + "' is not set");
    std::string v = cfg->store.get(key);
    if (v.size() + 1 > len) throw tdc::Error(tdc::Errc::invalid_argument, "buffer too small");
    std::memcpy(buf, v.c_str(), v.size() + 1);
  });
}

tdc_status tdc_config_validate(const tdc_config* cfg) {
  return guarded([&] {
    require(cfg, "null argument");
    tdc::parse_config(cfg->store);
  });
}

int tdc_run(const tdc_config* cfg) {
  if (!cfg) {
    last_error = "null argument";
    return 2;
  }
  tdc::RunConfig rc;
  tdc_status st = guarded([&] { rc = tdc::parse_config(cfg->store); });
  if (st != TDC_OK) {
    std::cerr << "error [" << tdc_status_name(st) << "]: " << last_error << '\n';
    return 2;
  }
  return tdc::run(rc, std::cout, std::cerr);
}

tdc_status tdc_field_create(const char* name, double c1, double c2, tdc_field** out) {
  return guarded([&] {
    require(name && out, "null argument");
    std::string n = name;
    tdc::VectorField f;
    if (n == "rotation") f = tdc::VectorField::rotation();
    else if (n == "spiral") f = tdc::VectorField::spiral(1.0);
    else if (n == "zero") f = tdc::VectorField::zero();
    else if (n == "constant") f = tdc::VectorField::constant({c1, c2});
    else throw tdc::Error(tdc::Errc::invalid_argument, "unknown field '" + n + "'");
    *out = new tdc_field{f};
  });
}

void tdc_field_destroy(tdc_field* field) { delete field; }

tdc_status tdc_field_eval(const tdc_field* field, double x1, double x2, double t, double* b1, double* b2) {
  return guarded([&] {
    require(field && b1 && b2, "null argument");
    tdc::Vec2 v = field->field({x1, x2}, t);
    *b1 = v.x;
    *b2 = v.y;
  });
}

tdc_status tdc_flow_endpoint(const tdc_field* field, double x1, double x2, double t0, double t1, double* y1,
                             double* y2) {
  return guarded([&] {
    require(field && y1 && y2, "null argument");
    tdc::Vec2 y = tdc::flow_point(field->field, {x1, x2}, t0, t1, 0.01);
    *y1 = y.x;
    *y2 = y.y;
  });
}

tdc_status tdc_fit_log_cost(const double* epsilon, const double* K, size_t n, double* slope, double* intercept,
                            double* r2) {
  return guarded([&] {
    require(epsilon && K && slope && intercept && r2, "null argument");
    std::vector<tdc::SweepRow> rows(n);
    for (size_t k = 0; k < n; ++k) {
      rows[k].epsilon = epsilon[k];
      rows[k].K = K[k];
    }
    tdc::FitResult f = tdc::fit_log_cost(rows);
    *slope = f.slope;
    *intercept = f.intercept;
    *r2 = f.r2;
  });
}

}  // extern "C"
