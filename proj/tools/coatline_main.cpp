// coatline CLI: file-based front end over the shared-library C API.
//
//   coatline simulate          --config cfg.json --out runs/a
//   coatline identify          --log runs/a/log.csv --op runs/a/meta.json --out runs/a
//   coatline calibrate-kernel  --model runs/a/model.json --out runs/a
//   coatline design-controller --model runs/a/model.json --out runs/a
//   coatline closed-loop       --model ... --controller ... --op ... --out runs/a
//   coatline validate          --log ... --model ... --op ... --out runs/a
//
// Exit codes: 0 ok, 2 validation, 3 numeric failure, 4 I/O.

#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "coatline/coatline.h"

namespace {

struct RunDeleter {
  void operator()(coatline_run *r) const { coatline_run_free(r); }
};

int finish(coatline_run *run, coatline_status st, const std::string &what) {
  if (st == COATLINE_OK) {
    std::printf("%s: ok\n", what.c_str());
    return 0;
  }
  std::fprintf(stderr, "%s: error: %s\n", what.c_str(), coatline_run_last_error(run));
  return static_cast<int>(st);
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"slot-die coating: simulate / identify / calibrate / design / closed-loop"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  long long seed = -1;
  app.add_option("--config", config_path, "run configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override all RNG seeds");
  app.add_option("--out", out_dir, "output directory");

  std::string log_path, op_path, model_path, controller_path;

  CLI::App *sim = app.add_subcommand("simulate", "run the synthetic plant, write log.csv + meta.json");
  CLI::App *ident = app.add_subcommand("identify", "fit delay, scalar dynamics and gain matrix");
  ident->add_option("--log", log_path, "signal log CSV")->required()->check(CLI::ExistingFile);
  ident->add_option("--op", op_path, "operating point JSON (e.g. meta.json)")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::App *cal = app.add_subcommand("calibrate-kernel", "fit the Gaussian kernel family to a model");
  cal->add_option("--model", model_path, "identified model JSON")->required()->check(CLI::ExistingFile);
  CLI::App *design = app.add_subcommand("design-controller", "P or IMC design from a model");
  design->add_option("--model", model_path, "identified model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::App *loop = app.add_subcommand("closed-loop", "simulate the thickness control loop");
  loop->add_option("--model", model_path, "identified model JSON")->required()->check(CLI::ExistingFile);
  loop->add_option("--controller", controller_path, "controller JSON")
      ->required()
      ->check(CLI::ExistingFile);
  loop->add_option("--op", op_path, "operating point JSON")->check(CLI::ExistingFile);
  CLI::App *val = app.add_subcommand("validate", "RMSE / R^2 of a model against a log");
  val->add_option("--log", log_path, "signal log CSV")->required()->check(CLI::ExistingFile);
  val->add_option("--model", model_path, "identified model JSON")->required()->check(CLI::ExistingFile);
  val->add_option("--op", op_path, "operating point JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<coatline_run, RunDeleter> run(coatline_run_new());
  if (!run) {
    std::fprintf(stderr, "failed to create session\n");
    return 3;
  }

  coatline_status st = COATLINE_OK;
  if (!config_path.empty()) st = coatline_run_load_config(run.get(), config_path.c_str());
  if (st == COATLINE_OK && seed >= 0) st = coatline_run_set_seed(run.get(), seed);
  if (st == COATLINE_OK) st = coatline_run_set_out_dir(run.get(), out_dir.c_str());
  if (st != COATLINE_OK) return finish(run.get(), st, "setup");

  if (sim->parsed()) return finish(run.get(), coatline_cmd_simulate(run.get()), "simulate");
  if (ident->parsed())
    return finish(run.get(), coatline_cmd_identify(run.get(), log_path.c_str(), op_path.c_str()),
                  "identify");
  if (cal->parsed())
    return finish(run.get(), coatline_cmd_calibrate_kernel(run.get(), model_path.c_str()),
                  "calibrate-kernel");
  if (design->parsed())
    return finish(run.get(), coatline_cmd_design_controller(run.get(), model_path.c_str()),
                  "design-controller");
  if (loop->parsed())
    return finish(run.get(),
                  coatline_cmd_closed_loop(run.get(), model_path.c_str(), controller_path.c_str(),
                                           op_path.empty() ? nullptr : op_path.c_str()),
                  "closed-loop");
  if (val->parsed())
    return finish(run.get(),
                  coatline_cmd_validate(run.get(), log_path.c_str(), model_path.c_str(),
                                        op_path.c_str()),
                  "validate");
  return 2;
}
