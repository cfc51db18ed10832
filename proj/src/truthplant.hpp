#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dynamics.hpp"

namespace coatline {

/// Synthetic data-generating plant: depth-averaged 2-D thin film with exact
/// upwind advection along x (CFL = 1 by construction, dx = U0*sim_dt),
/// explicit lateral diffusion along y, a second-order unit-DC supply filter
/// per inlet, and disc-footprint sensing with optional Gaussian noise.
struct TruthPlantConfig {
  Geometry geometry;
  double lateral_diffusivity = 1.0878e-3;  // D_y [m^2/s]
  double supply_c0 = 1.87e4;
  double supply_c1 = 1.97e2;
  double sim_dt = 4.0e-4;      // [s]
  std::size_t grid_ny = 150;
  double domain_margin = 0.1;  // x domain extends (1+margin)*x_s
  double noise_std = 5.0e-7;   // [m]
  std::uint64_t rng_seed = 42;
  double warmup_time = 0.8;    // [s]

  void validate() const;

  double dx() const { return geometry.web_speed * sim_dt; }
  double dy() const { return geometry.coating_width / static_cast<double>(grid_ny); }
  /// Material columns; the inlet boundary is a separate ghost column.
  std::size_t grid_nx() const;
};

struct TruthPlantState {
  Matrix h_field;       // (1 + grid_nx) x grid_ny thicknesses [m]; row 0 = inlet ghost
  Matrix supply_states; // n x 2 filter states
  double sim_time = 0.0;
  double volume_in = 0.0;   // cumulative boundary influx [m^3]
  double volume_out = 0.0;  // cumulative outflux [m^3]
};

/// Per-width inlet flux [m^2/s] sampled on the y grid; each cell gets
/// q_i/w_s weighted by its overlap with stripe i, so the piecewise-constant
/// quadrature sum(gamma)*dy equals sum(q) exactly.
std::vector<double> inlet_flux_profile(const std::vector<double> &q, const Geometry &g,
                                       std::size_t grid_ny);

/// Plant state at rest: supply filters steady at q, empty film.
TruthPlantState initial_state(const TruthPlantConfig &cfg, const std::vector<double> &q);

/// One sim_dt update: supply filter -> inlet boundary -> advection shift ->
/// lateral diffusion. Mass is conserved up to the tracked boundary fluxes.
void step_truth(TruthPlantState &state, const std::vector<double> &q, const TruthPlantConfig &cfg);

/// Liquid volume in the material region [m^3].
double total_volume(const TruthPlantState &state, const TruthPlantConfig &cfg);

/// Disc-footprint sensor readings at (x_s, y_j); pass a sampler to add
/// Gaussian noise of std cfg.noise_std.
std::vector<double> measure(const TruthPlantState &state, const TruthPlantConfig &cfg,
                            NormalSampler *noise = nullptr);

/// Runs at constant q until the sensor vector stops changing; NumericError
/// if the time budget is exhausted first.
std::vector<double> steady_thickness(const TruthPlantConfig &cfg, const std::vector<double> &q);

struct ExperimentResult {
  SignalLog log;               // absolute frame
  std::vector<double> h0;      // noise-free steady sensor vector after warmup [m]
};

/// Warm-starts the plant at q0, then replays the input log at sampling Ts
/// (an integer multiple of sim_dt), logging noisy sensor readings.
ExperimentResult run_experiment(const TruthPlantConfig &cfg, const std::vector<double> &q0,
                                const SignalLog &q_log, double sample_time);

/// Finite-difference steady-state Jacobian, column i =
/// (h_steady(q0 + eps e_i) - h_steady(q0)) / eps. Independent oracle for the
/// identified gain matrix.
CrossGain dc_sensitivity(const TruthPlantConfig &cfg, const std::vector<double> &q0, double eps);

} // namespace coatline
