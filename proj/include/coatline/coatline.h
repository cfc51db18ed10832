/* coatline — slot-die cross-directional modelling, identification and
 * control toolkit.
 *
 * C API of the shared library. All pipeline state lives behind the opaque
 * coatline_run handle; every call returns a status code and the handle keeps
 * the last error message. File formats (signal-log CSV, model/controller
 * JSON) are documented in the project README.
 */
#ifndef COATLINE_H
#define COATLINE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum coatline_status {
  COATLINE_OK = 0,
  COATLINE_E_VALIDATION = 2, /* bad config, bad arguments, schema violations */
  COATLINE_E_NUMERIC = 3,    /* singular matrices, non-convergence, divergence */
  COATLINE_E_IO = 4          /* missing or malformed files */
} coatline_status;

typedef struct coatline_run coatline_run; /* opaque pipeline session */

/* Session lifecycle. A fresh session carries the built-in default
 * configuration (the reference five-stripe setup). */
coatline_run *coatline_run_new(void);
void coatline_run_free(coatline_run *run);

/* Replace the configuration from a JSON file (unknown keys are rejected). */
coatline_status coatline_run_load_config(coatline_run *run, const char *config_json_path);
/* Override every RNG seed (PRBS and truth-plant noise). */
coatline_status coatline_run_set_seed(coatline_run *run, long long seed);
/* Directory all stage outputs are written to (created on demand). */
coatline_status coatline_run_set_out_dir(coatline_run *run, const char *dir);

/* Pipeline stages. Paths are taken as given (relative paths resolve against
 * the process working directory). Outputs land in the session out dir:
 *   simulate      -> log.csv, meta.json
 *   identify      -> model.json
 *   calibrate     -> calibration.json
 *   design        -> controller.json
 *   closed_loop   -> closedloop.csv, closedloop_summary.json
 *   validate      -> fit_report.json
 */
coatline_status coatline_cmd_simulate(coatline_run *run);
coatline_status coatline_cmd_identify(coatline_run *run, const char *log_csv,
                                      const char *op_json);
coatline_status coatline_cmd_calibrate_kernel(coatline_run *run, const char *model_json);
coatline_status coatline_cmd_design_controller(coatline_run *run, const char *model_json);
coatline_status coatline_cmd_closed_loop(coatline_run *run, const char *model_json,
                                         const char *controller_json, const char *op_json);
coatline_status coatline_cmd_validate(coatline_run *run, const char *log_csv,
                                      const char *model_json, const char *op_json);

/* Message for the most recent failing call on this handle; empty string if
 * none. The pointer stays valid until the next call on the same handle. */
const char *coatline_run_last_error(const coatline_run *run);

const char *coatline_version(void);

#ifdef __cplusplus
}
#endif

#endif /* COATLINE_H */
