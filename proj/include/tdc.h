#ifndef TDC_H
#define TDC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tdc_status {
  TDC_OK = 0,
  TDC_ERR_INVALID_ARGUMENT = 1,
  TDC_ERR_GEOMETRY_TOO_COARSE,
  TDC_ERR_STEP_SIZE,
  TDC_ERR_SOLVER_CONVERGENCE,
  TDC_ERR_NO_FLUSHING,
  TDC_ERR_CANNOT_SHRINK,
  TDC_ERR_PARAMETER_OVERFLOW,
  TDC_ERR_NON_CONVERGENCE,
  TDC_ERR_ORACLE_TOO_LARGE,
  TDC_ERR_RESOLUTION_TOO_COARSE,
  TDC_ERR_DOMAIN_ERROR,
  TDC_ERR_CONFIG,
  TDC_ERR_IO,
  TDC_ERR_ESCAPE,
  TDC_ERR_UNSUPPORTED_GEOMETRY,
  TDC_ERR_CONSTRUCTION,
  TDC_ERR_INTERNAL = 100
} tdc_status;

typedef struct tdc_config tdc_config;
typedef struct tdc_field tdc_field;

/* Message of the last failed call on this thread ("" if none). */
const char* tdc_last_error(void);
const char* tdc_status_name(tdc_status status);

tdc_config* tdc_config_create(void);
void tdc_config_destroy(tdc_config* cfg);
tdc_status tdc_config_load_file(tdc_config* cfg, const char* path);
tdc_status tdc_config_set(tdc_config* cfg, const char* key, const char* value);
/* Copies the raw value of key into buf; TDC_ERR_CONFIG if unset. */
tdc_status tdc_config_get(const tdc_config* cfg, const char* key, char* buf, size_t len);
tdc_status tdc_config_validate(const tdc_config* cfg);
/* Returns the process exit status: 0 pass, 1 verdict failure, 2 operational error. */
int tdc_run(const tdc_config* cfg);

/* name: "rotation", "spiral", "zero" or "constant" (uses c1, c2). */
tdc_status tdc_field_create(const char* name, double c1, double c2, tdc_field** out);
void tdc_field_destroy(tdc_field* field);
tdc_status tdc_field_eval(const tdc_field* field, double x1, double x2, double t, double* b1, double* b2);
tdc_status tdc_flow_endpoint(const tdc_field* field, double x1, double x2, double t0, double t1, double* y1,
                             double* y2);
/* Least-squares fit of ln K against 1/epsilon. */
tdc_status tdc_fit_log_cost(const double* epsilon, const double* K, size_t n, double* slope, double* intercept,
                            double* r2);

#ifdef __cplusplus
}
#endif

#endif
