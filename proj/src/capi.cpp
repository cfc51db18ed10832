#include "coatline/coatline.h"

#include <string>

#include "pipeline.hpp"

struct coatline_run {
  coatline::RunConfig cfg;
  std::filesystem::path out_dir = "out";
  std::string last_error;
};

namespace {

template <typename Fn>
coatline_status guarded(coatline_run *run, Fn &&fn) {
  if (run == nullptr) return COATLINE_E_VALIDATION;
  run->last_error.clear();
  try {
    fn();
    return COATLINE_OK;
  } catch (const coatline::ValidationError &e) {
    run->last_error = e.what();
    return COATLINE_E_VALIDATION;
  } catch (const coatline::NumericError &e) {
    run->last_error = e.what();
    return COATLINE_E_NUMERIC;
  } catch (const coatline::IoError &e) {
    run->last_error = e.what();
    return COATLINE_E_IO;
  } catch (const std::exception &e) {
    run->last_error = e.what();
    return COATLINE_E_NUMERIC;
  }
}

std::filesystem::path required_path(const char *p, const char *what) {
  if (p == nullptr || *p == '\0')
    throw coatline::ValidationError(std::string(what) + " path is required");
  return p;
}

} // namespace

extern "C" {

coatline_run *coatline_run_new(void) {
  try {
    return new coatline_run();
  } catch (...) {
    return nullptr;
  }
}

void coatline_run_free(coatline_run *run) { delete run; }

coatline_status coatline_run_load_config(coatline_run *run, const char *config_json_path) {
  return guarded(run, [&] {
    run->cfg = coatline::load_run_config(required_path(config_json_path, "config"));
  });
}

coatline_status coatline_run_set_seed(coatline_run *run, long long seed) {
  return guarded(run, [&] {
    if (seed < 0) throw coatline::ValidationError("seed must be nonnegative");
    run->cfg.io.seed = static_cast<std::uint64_t>(seed);
    run->cfg.prbs.base_seed = run->cfg.io.seed;
    run->cfg.truth_plant.rng_seed = run->cfg.io.seed;
  });
}

coatline_status coatline_run_set_out_dir(coatline_run *run, const char *dir) {
  return guarded(run, [&] { run->out_dir = required_path(dir, "out dir"); });
}

coatline_status coatline_cmd_simulate(coatline_run *run) {
  return guarded(run, [&] { coatline::cmd_simulate(run->cfg, run->out_dir); });
}

coatline_status coatline_cmd_identify(coatline_run *run, const char *log_csv,
                                      const char *op_json) {
  return guarded(run, [&] {
    coatline::cmd_identify(run->cfg, required_path(log_csv, "log CSV"),
                           required_path(op_json, "operating point JSON"), run->out_dir);
  });
}

coatline_status coatline_cmd_calibrate_kernel(coatline_run *run, const char *model_json) {
  return guarded(run, [&] {
    coatline::cmd_calibrate(run->cfg, required_path(model_json, "model JSON"), run->out_dir);
  });
}

coatline_status coatline_cmd_design_controller(coatline_run *run, const char *model_json) {
  return guarded(run, [&] {
    coatline::cmd_design(run->cfg, required_path(model_json, "model JSON"), run->out_dir);
  });
}

coatline_status coatline_cmd_closed_loop(coatline_run *run, const char *model_json,
                                         const char *controller_json, const char *op_json) {
  return guarded(run, [&] {
    coatline::cmd_closed_loop(run->cfg, required_path(model_json, "model JSON"),
                              required_path(controller_json, "controller JSON"),
                              op_json == nullptr ? std::filesystem::path() : op_json,
                              run->out_dir);
  });
}

coatline_status coatline_cmd_validate(coatline_run *run, const char *log_csv,
                                      const char *model_json, const char *op_json) {
  return guarded(run, [&] {
    coatline::cmd_validate(run->cfg, required_path(log_csv, "log CSV"),
                           required_path(model_json, "model JSON"),
                           required_path(op_json, "operating point JSON"), run->out_dir);
  });
}

const char *coatline_run_last_error(const coatline_run *run) {
  if (run == nullptr) return "";
  return run->last_error.c_str();
}

const char *coatline_version(void) { return "0.1.0"; }

} // extern "C"
