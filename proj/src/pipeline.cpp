#include "pipeline.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace coatline {

using nlohmann::json;

namespace {

json matrix_row_major(const Matrix &m) {
  json a = json::array();
  for (double v : m.data()) a.push_back(v);
  return a;
}

Matrix matrix_from_row_major(const json &a, std::size_t n) {
  if (!a.is_array() || a.size() != n * n)
    throw ValidationError("model JSON: H must be a row-major array of n*n numbers");
  Matrix m(n, n);
  for (std::size_t k = 0; k < a.size(); ++k) m.data()[k] = a.at(k).get<double>();
  return m;
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

json parse_file(const std::filesystem::path &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error &e) {
    throw IoError("JSON parse error in " + path.string() + ": " + e.what());
  }
}

const char *provenance_name(GainProvenance p) {
  switch (p) {
    case GainProvenance::kernel: return "kernel";
    case GainProvenance::identified: return "identified";
    case GainProvenance::finite_difference: return "finite-difference";
  }
  return "identified";
}

GainProvenance provenance_from_name(const std::string &s) {
  if (s == "kernel") return GainProvenance::kernel;
  if (s == "finite-difference") return GainProvenance::finite_difference;
  return GainProvenance::identified;
}

} // namespace

void write_model_json(const IdentifiedModel &model, const std::filesystem::path &path) {
  json j;
  j["L"] = model.scalar.dead_time;
  j["d"] = static_cast<int>(std::lround(model.scalar.dead_time / model.sample_time));
  j["Ts"] = model.sample_time;
  j["c0"] = model.scalar.c0;
  j["c1"] = model.scalar.c1;
  j["n"] = model.gain.h.rows();
  j["H"] = matrix_row_major(model.gain.h);
  j["provenance"] = provenance_name(model.gain.provenance);
  json rmse = json::array(), r2 = json::array();
  for (double v : model.fit.rmse) rmse.push_back(finite_or_null(v));
  for (double v : model.fit.r_squared) r2.push_back(finite_or_null(v));
  j["fit"] = {{"rmse", rmse}, {"r2", r2}};
  write_text(path, j.dump(2) + "\n");
}

IdentifiedModel read_model_json(const std::filesystem::path &path) {
  const json j = parse_file(path);
  IdentifiedModel model;
  try {
    model.sample_time = j.at("Ts").get<double>();
    const std::size_t n = j.at("n").get<std::size_t>();
    model.scalar =
        ScalarSurrogate::normalized(j.at("L").get<double>(), j.at("c0").get<double>(),
                                    j.at("c1").get<double>());
    model.gain.h = matrix_from_row_major(j.at("H"), n);
    model.gain.provenance = j.contains("provenance")
                                ? provenance_from_name(j.at("provenance").get<std::string>())
                                : GainProvenance::identified;
    if (j.contains("fit")) {
      for (const auto &v : j.at("fit").at("rmse"))
        model.fit.rmse.push_back(v.is_null() ? std::nan("") : v.get<double>());
      for (const auto &v : j.at("fit").at("r2"))
        model.fit.r_squared.push_back(v.is_null() ? std::nan("") : v.get<double>());
    }
  } catch (const json::exception &e) {
    throw ValidationError("model JSON " + path.string() + ": " + e.what());
  }
  model.gain.validate();
  return model;
}

void write_meta_json(const RunConfig &cfg, const OperatingPoint &op,
                     const std::filesystem::path &path) {
  json j = json::parse(run_config_json(cfg));
  json meta;
  meta["config"] = j;
  meta["n"] = cfg.geometry.n_inlets;
  meta["Ts_s"] = cfg.sample_time;
  meta["q0_m3ps"] = op.q0;
  meta["h0_m"] = op.h0;
  write_text(path, meta.dump(2) + "\n");
}

OperatingPoint read_operating_point_json(const std::filesystem::path &path) {
  const json j = parse_file(path);
  OperatingPoint op;
  try {
    if (j.contains("q0_m3ps")) {
      op.q0 = j.at("q0_m3ps").get<std::vector<double>>();
      op.h0 = j.at("h0_m").get<std::vector<double>>();
    } else {
      op.q0 = j.at("operating_point").at("q0_m3ps").get<std::vector<double>>();
      op.h0 = j.at("operating_point").at("h0_m").get<std::vector<double>>();
    }
  } catch (const json::exception &e) {
    throw ValidationError("operating point JSON " + path.string() + ": " + e.what());
  }
  op.validate(op.q0.size());
  return op;
}

void cmd_simulate(const RunConfig &cfg, const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  OperatingPoint op;
  op.q0 = cfg.q0;
  op.h0 = std::vector<double>(cfg.q0.size(), 1.0);  // placeholder until measured
  const SignalLog q_log = design_prbs(cfg.prbs, op, cfg.sample_time);
  const ExperimentResult res = run_experiment(cfg.truth_plant, cfg.q0, q_log, cfg.sample_time);
  op.h0 = res.h0;

  write_signal_log_csv(res.log, (out_dir / "log.csv").string());
  write_meta_json(cfg, op, out_dir / "meta.json");
}

void cmd_identify(const RunConfig &cfg, const std::filesystem::path &log_csv,
                  const std::filesystem::path &op_json, const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  const SignalLog log = read_signal_log_csv(log_csv.string());
  const OperatingPoint op = read_operating_point_json(op_json);
  const SignalLog dev = to_deviation(log, op);

  const std::size_t channel =
      cfg.ident.siso_channel_set ? cfg.ident.siso_channel : dev.channels() / 2;
  if (channel >= dev.channels())
    throw ValidationError("identify: siso_channel out of range for the log");

  const DelayEstimate delay = estimate_delay(dev, channel, cfg.ident.d_max, cfg.ident.fit);
  IdentifiedModel model;
  model.sample_time = dev.sample_time;
  model.scalar = fit_siso(dev, channel, delay.delay_samples, dev.sample_time, cfg.ident.fit);
  model.gain = fit_h(dev, model.scalar, dev.sample_time);
  model.fit = validate_fit(dev, model.scalar, model.gain);
  write_model_json(model, out_dir / "model.json");
}

void cmd_calibrate(const RunConfig &cfg, const std::filesystem::path &model_json,
                   const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  const IdentifiedModel model = read_model_json(model_json);
  if (model.gain.h.rows() != cfg.geometry.n_inlets)
    throw ValidationError("calibrate: model dimension differs from configured geometry");
  const CalibrationResult cal =
      calibrate(model.gain, cfg.geometry, cfg.ident.ell_lo, cfg.ident.ell_hi, cfg.ident.ell_tol);

  json j;
  j["kappa_star"] = cal.kappa_star;
  j["ell_star_m"] = cal.ell_star;
  j["rel_error"] = cal.rel_error;
  write_text(out_dir / "calibration.json", j.dump(2) + "\n");
}

void cmd_design(const RunConfig &cfg, const std::filesystem::path &model_json,
                const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  const IdentifiedModel model = read_model_json(model_json);
  json j;
  j["type"] = cfg.control.type;
  if (cfg.control.type == "p") {
    const PController ctrl = design_p(model.gain, cfg.control.beta);
    j["beta"] = ctrl.beta;
    j["K_P"] = matrix_row_major(ctrl.k_p);
  } else {
    const ImcController ctrl =
        design_imc(model.gain, model.scalar, cfg.control.lambda, cfg.control.floor_fraction);
    j["lambda_s"] = ctrl.lambda;
    j["floor_fraction"] = ctrl.floor_fraction;
    j["D"] = matrix_row_major(ctrl.d);
    j["singular_values"] = ctrl.s_raw;
    j["singular_values_eff"] = ctrl.s_eff;
  }
  j["n"] = model.gain.h.rows();
  write_text(out_dir / "controller.json", j.dump(2) + "\n");
}

namespace {

ControllerSpec controller_from_json(const json &j, const IdentifiedModel &model,
                                    const RunConfig &cfg) {
  const std::string type = j.at("type").get<std::string>();
  const std::size_t n = model.gain.h.rows();
  if (type == "p") {
    PController ctrl;
    ctrl.beta = j.at("beta").get<double>();
    ctrl.k_p = matrix_from_row_major(j.at("K_P"), n);
    return ctrl;
  }
  if (type == "imc") {
    // Rebuild through the design routine so the floor invariants hold, then
    // take the persisted D verbatim.
    ImcController ctrl = design_imc(model.gain, model.scalar,
                                    j.at("lambda_s").get<double>(),
                                    j.at("floor_fraction").get<double>());
    ctrl.d = matrix_from_row_major(j.at("D"), n);
    return ctrl;
  }
  throw ValidationError("controller JSON: type must be 'p' or 'imc'");
  (void)cfg;
}

} // namespace

void cmd_closed_loop(const RunConfig &cfg, const std::filesystem::path &model_json,
                     const std::filesystem::path &controller_json,
                     const std::filesystem::path &op_json, const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  const IdentifiedModel model = read_model_json(model_json);
  const json cj = parse_file(controller_json);
  OperatingPoint op;
  if (!op_json.empty()) {
    op = read_operating_point_json(op_json);
  } else {
    if (!cfg.h0) throw ValidationError("closed-loop: provide --op or operating_point.h0_m");
    op.q0 = cfg.q0;
    op.h0 = *cfg.h0;
  }

  const ControllerSpec ctrl = controller_from_json(cj, model, cfg);
  const double beta = std::holds_alternative<PController>(ctrl)
                          ? std::get<PController>(ctrl).beta
                          : cfg.control.beta;
  const std::vector<double> dh_ref = shape_reference(cfg.control.h_target, op, beta);

  PlantSpec plant;
  if (cfg.control.plant == "truth") {
    plant = TruthPlant{cfg.truth_plant, cfg.control.measurement_noise};
  } else {
    plant = SurrogatePlant{model.scalar, model.gain};
  }

  LoopOptions opts;
  opts.horizon = cfg.control.horizon;
  opts.sample_time = model.sample_time;
  opts.clamp_actuation = cfg.control.clamp_actuation;
  const ClosedLoopResult res = simulate_closed_loop(plant, ctrl, dh_ref, op, opts);

  write_signal_log_csv(res.log, (out_dir / "closedloop.csv").string());
  json j;
  j["final_values_m"] = res.final_values;
  j["overshoot"] = res.overshoot;
  j["settling_s"] = res.settling_time;
  j["h_target_m"] = cfg.control.h_target;
  write_text(out_dir / "closedloop_summary.json", j.dump(2) + "\n");
}

void cmd_validate(const RunConfig &cfg, const std::filesystem::path &log_csv,
                  const std::filesystem::path &model_json, const std::filesystem::path &op_json,
                  const std::filesystem::path &out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  const SignalLog log = read_signal_log_csv(log_csv.string());
  const OperatingPoint op = read_operating_point_json(op_json);
  const IdentifiedModel model = read_model_json(model_json);
  const SignalLog dev = to_deviation(log, op);
  const FitReport report = validate_fit(dev, model.scalar, model.gain);

  json rmse = json::array(), r2 = json::array();
  for (double v : report.rmse) rmse.push_back(finite_or_null(v));
  for (double v : report.r_squared) r2.push_back(finite_or_null(v));
  json j;
  j["rmse_m"] = rmse;
  j["r2"] = r2;
  write_text(out_dir / "fit_report.json", j.dump(2) + "\n");
}

} // namespace coatline
