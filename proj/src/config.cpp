#include "config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace coatline {

using nlohmann::json;

RunConfig::RunConfig() {
  truth_plant.geometry = geometry;
  ident.siso_channel = geometry.n_inlets / 2;
  prbs.base_seed = io.seed;
  truth_plant.rng_seed = io.seed;
}

void RunConfig::validate() const {
  geometry.validate();
  truth_plant.validate();
  prbs.validate(sample_time);
  if (!(sample_time > 0.0)) throw ValidationError("config: sample_time must be positive");
  if (q0.size() != geometry.n_inlets)
    throw ValidationError("config: q0 length differs from n_inlets");
  for (double v : q0)
    if (!(v > 0.0)) throw ValidationError("config: q0 entries must be positive");
  if (h0 && h0->size() != geometry.n_inlets)
    throw ValidationError("config: h0 length differs from n_inlets");
  if (ident.d_max < 0) throw ValidationError("config: ident.d_max must be >= 0");
  if (ident.siso_channel >= geometry.n_inlets)
    throw ValidationError("config: ident.siso_channel out of range");
  if (control.type != "p" && control.type != "imc")
    throw ValidationError("config: control.type must be 'p' or 'imc'");
  if (!(control.beta > 0.0)) throw ValidationError("config: control.beta must be positive");
  if (!(control.lambda > 0.0)) throw ValidationError("config: control.lambda must be positive");
  if (!(control.floor_fraction > 0.0) || control.floor_fraction > 1.0)
    throw ValidationError("config: control.floor_fraction must lie in (0, 1]");
  if (!(control.h_target > 0.0)) throw ValidationError("config: control.h_target_m must be positive");
  if (!(control.horizon > 0.0)) throw ValidationError("config: control.horizon_s must be positive");
  if (control.plant != "surrogate" && control.plant != "truth")
    throw ValidationError("config: control.plant must be 'surrogate' or 'truth'");
}

namespace {

void reject_unknown_keys(const json &obj, const std::set<std::string> &allowed,
                         const std::string &section) {
  if (!obj.is_object()) throw ValidationError("config: section '" + section + "' must be an object");
  for (const auto &item : obj.items()) {
    if (!allowed.contains(item.key()))
      throw ValidationError("config: unknown key '" + item.key() + "' in section '" + section + "'");
  }
}

template <typename T>
void read_if(const json &obj, const char *key, T &out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void parse_geometry(const json &j, Geometry &g) {
  reject_unknown_keys(j, {"n_inlets", "stripe_centers_m", "stripe_width_m", "channel_height_m",
                          "sensor_station_m", "sensor_radius_m", "coating_width_m",
                          "web_speed_mps"},
                      "geometry");
  read_if(j, "n_inlets", g.n_inlets);
  read_if(j, "stripe_centers_m", g.stripe_centers);
  read_if(j, "stripe_width_m", g.stripe_width);
  read_if(j, "channel_height_m", g.channel_height);
  read_if(j, "sensor_station_m", g.sensor_station);
  read_if(j, "sensor_radius_m", g.sensor_radius);
  read_if(j, "coating_width_m", g.coating_width);
  read_if(j, "web_speed_mps", g.web_speed);
}

} // namespace

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error &e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }

  RunConfig cfg;
  reject_unknown_keys(j, {"geometry", "operating_point", "truth_plant", "prbs", "ident",
                          "control", "io", "sample_time_s"},
                      "<root>");
  read_if(j, "sample_time_s", cfg.sample_time);
  if (j.contains("geometry")) parse_geometry(j.at("geometry"), cfg.geometry);
  cfg.truth_plant.geometry = cfg.geometry;
  if (cfg.geometry.n_inlets != 5 && cfg.q0.size() == 5)
    cfg.q0.assign(cfg.geometry.n_inlets, 1.0e-6);
  cfg.ident.siso_channel = cfg.geometry.n_inlets / 2;

  if (j.contains("operating_point")) {
    const json &op = j.at("operating_point");
    reject_unknown_keys(op, {"q0_m3ps", "h0_m"}, "operating_point");
    read_if(op, "q0_m3ps", cfg.q0);
    if (op.contains("h0_m")) cfg.h0 = op.at("h0_m").get<std::vector<double>>();
  }
  if (j.contains("truth_plant")) {
    const json &tp = j.at("truth_plant");
    reject_unknown_keys(tp, {"lateral_diffusivity_m2ps", "supply_c0", "supply_c1", "sim_dt_s",
                             "grid_ny", "domain_margin", "noise_std_m", "rng_seed",
                             "warmup_time_s"},
                        "truth_plant");
    read_if(tp, "lateral_diffusivity_m2ps", cfg.truth_plant.lateral_diffusivity);
    read_if(tp, "supply_c0", cfg.truth_plant.supply_c0);
    read_if(tp, "supply_c1", cfg.truth_plant.supply_c1);
    read_if(tp, "sim_dt_s", cfg.truth_plant.sim_dt);
    read_if(tp, "grid_ny", cfg.truth_plant.grid_ny);
    read_if(tp, "domain_margin", cfg.truth_plant.domain_margin);
    read_if(tp, "noise_std_m", cfg.truth_plant.noise_std);
    read_if(tp, "rng_seed", cfg.truth_plant.rng_seed);
    read_if(tp, "warmup_time_s", cfg.truth_plant.warmup_time);
  }
  if (j.contains("prbs")) {
    const json &pr = j.at("prbs");
    reject_unknown_keys(pr, {"amplitude_fraction", "bit_duration_s", "total_duration_s",
                             "base_seed"},
                        "prbs");
    read_if(pr, "amplitude_fraction", cfg.prbs.amplitude_fraction);
    read_if(pr, "bit_duration_s", cfg.prbs.bit_duration);
    read_if(pr, "total_duration_s", cfg.prbs.total_duration);
    read_if(pr, "base_seed", cfg.prbs.base_seed);
  }
  if (j.contains("ident")) {
    const json &id = j.at("ident");
    reject_unknown_keys(id, {"d_max", "siso_channel", "c0_lo", "c0_hi", "c1_lo", "c1_hi",
                             "grid_points", "refine_tol", "ell_lo_m", "ell_hi_m", "ell_tol_m"},
                        "ident");
    read_if(id, "d_max", cfg.ident.d_max);
    if (id.contains("siso_channel")) {
      cfg.ident.siso_channel = id.at("siso_channel").get<std::size_t>();
      cfg.ident.siso_channel_set = true;
    }
    read_if(id, "c0_lo", cfg.ident.fit.c0_lo);
    read_if(id, "c0_hi", cfg.ident.fit.c0_hi);
    read_if(id, "c1_lo", cfg.ident.fit.c1_lo);
    read_if(id, "c1_hi", cfg.ident.fit.c1_hi);
    read_if(id, "grid_points", cfg.ident.fit.grid_points);
    read_if(id, "refine_tol", cfg.ident.fit.refine_tol);
    read_if(id, "ell_lo_m", cfg.ident.ell_lo);
    read_if(id, "ell_hi_m", cfg.ident.ell_hi);
    read_if(id, "ell_tol_m", cfg.ident.ell_tol);
  }
  if (j.contains("control")) {
    const json &ct = j.at("control");
    reject_unknown_keys(ct, {"type", "beta", "lambda_s", "floor_fraction", "h_target_m",
                             "horizon_s", "plant", "clamp_actuation", "measurement_noise"},
                        "control");
    read_if(ct, "type", cfg.control.type);
    read_if(ct, "beta", cfg.control.beta);
    read_if(ct, "lambda_s", cfg.control.lambda);
    read_if(ct, "floor_fraction", cfg.control.floor_fraction);
    read_if(ct, "h_target_m", cfg.control.h_target);
    read_if(ct, "horizon_s", cfg.control.horizon);
    read_if(ct, "plant", cfg.control.plant);
    read_if(ct, "clamp_actuation", cfg.control.clamp_actuation);
    read_if(ct, "measurement_noise", cfg.control.measurement_noise);
  }
  if (j.contains("io")) {
    const json &io = j.at("io");
    reject_unknown_keys(io, {"seed"}, "io");
    if (io.contains("seed")) {
      cfg.io.seed = io.at("seed").get<std::uint64_t>();
      cfg.prbs.base_seed = cfg.io.seed;
      cfg.truth_plant.rng_seed = cfg.io.seed;
    }
  }
  if (j.contains("prbs") && j.at("prbs").contains("base_seed"))
    cfg.prbs.base_seed = j.at("prbs").at("base_seed").get<std::uint64_t>();
  if (j.contains("truth_plant") && j.at("truth_plant").contains("rng_seed"))
    cfg.truth_plant.rng_seed = j.at("truth_plant").at("rng_seed").get<std::uint64_t>();

  cfg.validate();
  return cfg;
}

std::string run_config_json(const RunConfig &cfg) {
  json j;
  j["sample_time_s"] = cfg.sample_time;
  j["geometry"] = {{"n_inlets", cfg.geometry.n_inlets},
                   {"stripe_centers_m", cfg.geometry.stripe_centers},
                   {"stripe_width_m", cfg.geometry.stripe_width},
                   {"channel_height_m", cfg.geometry.channel_height},
                   {"sensor_station_m", cfg.geometry.sensor_station},
                   {"sensor_radius_m", cfg.geometry.sensor_radius},
                   {"coating_width_m", cfg.geometry.coating_width},
                   {"web_speed_mps", cfg.geometry.web_speed}};
  j["operating_point"] = {{"q0_m3ps", cfg.q0}};
  if (cfg.h0) j["operating_point"]["h0_m"] = *cfg.h0;
  j["truth_plant"] = {{"lateral_diffusivity_m2ps", cfg.truth_plant.lateral_diffusivity},
                      {"supply_c0", cfg.truth_plant.supply_c0},
                      {"supply_c1", cfg.truth_plant.supply_c1},
                      {"sim_dt_s", cfg.truth_plant.sim_dt},
                      {"grid_ny", cfg.truth_plant.grid_ny},
                      {"domain_margin", cfg.truth_plant.domain_margin},
                      {"noise_std_m", cfg.truth_plant.noise_std},
                      {"rng_seed", cfg.truth_plant.rng_seed},
                      {"warmup_time_s", cfg.truth_plant.warmup_time}};
  j["prbs"] = {{"amplitude_fraction", cfg.prbs.amplitude_fraction},
               {"bit_duration_s", cfg.prbs.bit_duration},
               {"total_duration_s", cfg.prbs.total_duration},
               {"base_seed", cfg.prbs.base_seed}};
  j["ident"] = {{"d_max", cfg.ident.d_max},
                {"siso_channel", cfg.ident.siso_channel},
                {"c0_lo", cfg.ident.fit.c0_lo},
                {"c0_hi", cfg.ident.fit.c0_hi},
                {"c1_lo", cfg.ident.fit.c1_lo},
                {"c1_hi", cfg.ident.fit.c1_hi},
                {"grid_points", cfg.ident.fit.grid_points},
                {"refine_tol", cfg.ident.fit.refine_tol},
                {"ell_lo_m", cfg.ident.ell_lo},
                {"ell_hi_m", cfg.ident.ell_hi},
                {"ell_tol_m", cfg.ident.ell_tol}};
  j["control"] = {{"type", cfg.control.type},
                  {"beta", cfg.control.beta},
                  {"lambda_s", cfg.control.lambda},
                  {"floor_fraction", cfg.control.floor_fraction},
                  {"h_target_m", cfg.control.h_target},
                  {"horizon_s", cfg.control.horizon},
                  {"plant", cfg.control.plant},
                  {"clamp_actuation", cfg.control.clamp_actuation},
                  {"measurement_noise", cfg.control.measurement_noise}};
  j["io"] = {{"seed", cfg.io.seed}};
  return j.dump(2);
}

} // namespace coatline
