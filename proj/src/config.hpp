#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "control.hpp"
#include "ident.hpp"

namespace coatline {

struct IdentConfig {
  int d_max = 30;
  std::size_t siso_channel;  // defaults to the center channel
  bool siso_channel_set = false;
  SisoFitOptions fit;
  double ell_lo = 1e-4, ell_hi = 1e-1;  // calibration search range [m]
  double ell_tol = 1e-7;
};

struct ControlConfig {
  std::string type = "p";  // "p" | "imc"
  double beta = 0.1;
  double lambda = 0.01;          // [s]
  double floor_fraction = 0.05;
  double h_target = 100e-6;      // [m]
  double horizon = 30.0;         // [s]
  std::string plant = "surrogate";  // "surrogate" | "truth"
  bool clamp_actuation = false;
  bool measurement_noise = false;
};

struct IoConfig {
  std::uint64_t seed = 42;
};

/// Whole-run configuration; every default equals the operating point of the
/// reference setup. JSON loading is schema-checked: unknown keys are
/// rejected before any computation runs.
struct RunConfig {
  Geometry geometry = default_geometry();
  std::vector<double> q0 = std::vector<double>(5, 1.0e-6);  // [m^3/s]
  std::optional<std::vector<double>> h0;                    // [m], usually measured
  TruthPlantConfig truth_plant;
  PrbsSpec prbs;
  double sample_time = 0.01;  // Ts [s]
  IdentConfig ident;
  ControlConfig control;
  IoConfig io;

  RunConfig();
  void validate() const;
};

RunConfig load_run_config(const std::filesystem::path &path);
std::string run_config_json(const RunConfig &cfg);

} // namespace coatline
