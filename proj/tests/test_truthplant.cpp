#include <doctest.h>

#include <cmath>
#include <numeric>

#include "truthplant.hpp"

using namespace coatline;

namespace {

TruthPlantConfig default_cfg() {
  TruthPlantConfig cfg;
  cfg.geometry = default_geometry();
  return cfg;
}

std::vector<double> q_nominal(double v = 1.0e-6) { return std::vector<double>(5, v); }

} // namespace

TEST_CASE("config invariants: CFL, stability, derived grid") {
  const TruthPlantConfig cfg = default_cfg();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.dx() == doctest::Approx(cfg.geometry.web_speed * cfg.sim_dt));
  CHECK(cfg.grid_nx() * cfg.dx() >= (1.0 + cfg.domain_margin) * cfg.geometry.sensor_station - 1e-12);
  CHECK(cfg.lateral_diffusivity * cfg.sim_dt / (cfg.dy() * cfg.dy()) <= 0.5);

  TruthPlantConfig unstable = cfg;
  unstable.lateral_diffusivity = 5e-3;
  CHECK_THROWS_AS(unstable.validate(), ValidationError);
}

TEST_CASE("inlet flux profile: stripe values and exact mass consistency") {
  const Geometry g = default_geometry();
  const std::vector<double> gamma = inlet_flux_profile(q_nominal(), g, 150);
  // on-stripe value q/w_s
  for (double v : gamma) CHECK(v == doctest::Approx(1.0e-6 / 0.03).epsilon(1e-12));

  const std::vector<double> zero = inlet_flux_profile(q_nominal(0.0), g, 150);
  for (double v : zero) CHECK(v == 0.0);

  // integral over [0, w] equals sum(q) for any grid, including misaligned ones
  for (std::size_t ny : {std::size_t{150}, std::size_t{151}, std::size_t{97}}) {
    const std::vector<double> prof = inlet_flux_profile({1e-6, 2e-6, 0.0, 5e-7, 1e-6}, g, ny);
    const double dy = g.coating_width / static_cast<double>(ny);
    const double integral = std::accumulate(prof.begin(), prof.end(), 0.0) * dy;
    CHECK(integral == doctest::Approx(4.5e-6).epsilon(1e-12));
  }
}

TEST_CASE("pure advection: steady mass balance at the sensor") {
  TruthPlantConfig cfg = default_cfg();
  cfg.lateral_diffusivity = 0.0;
  cfg.noise_std = 0.0;
  const std::vector<double> h = steady_thickness(cfg, q_nominal());
  // J = U0 h at steady state -> h = q/(w_s U0)
  const double expect = 1.0e-6 / (0.03 * 0.333);
  for (double v : h) CHECK(v == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("pure advection: a field pulse shifts one cell per step, undistorted") {
  TruthPlantConfig cfg = default_cfg();
  cfg.lateral_diffusivity = 0.0;
  TruthPlantState state = initial_state(cfg, q_nominal(0.0));
  // q = 0 keeps the inlet quiet; poke the first material row directly
  const std::size_t j0 = 75;
  state.h_field(1, j0) = 1.0e-4;

  const std::size_t sensor_row = static_cast<std::size_t>(
      std::llround(cfg.geometry.sensor_station / cfg.dx() + 0.5));
  const std::size_t steps = sensor_row - 1;
  // L/sim_dt rounds to the same transit step count the grid realizes
  CHECK(static_cast<double>(steps) ==
        doctest::Approx(cfg.geometry.transport_delay() / cfg.sim_dt).epsilon(0.005));
  for (std::size_t k = 0; k < steps; ++k) step_truth(state, q_nominal(0.0), cfg);
  CHECK(state.h_field(sensor_row, j0) == 1.0e-4);  // exact shift, no smearing
  CHECK(state.h_field(sensor_row, j0 + 1) == 0.0);
  CHECK(state.h_field(sensor_row - 1, j0) == 0.0);
}

TEST_CASE("mass budget: volume change equals tracked boundary fluxes") {
  TruthPlantConfig cfg = default_cfg();
  cfg.noise_std = 0.0;
  TruthPlantState state = initial_state(cfg, q_nominal());
  // drive through a transient so the budget covers non-steady flow too
  const double v0 = total_volume(state, cfg);
  std::vector<double> q = q_nominal();
  for (int k = 0; k < 2500; ++k) {
    if (k == 500) q[2] = 1.4e-6;
    if (k == 1500) q[0] = 0.6e-6;
    step_truth(state, q, cfg);
  }
  const double dv = total_volume(state, cfg) - v0;
  const double net = state.volume_in - state.volume_out;
  CHECK(std::abs(dv - net) <= 1e-10 * std::max({std::abs(dv), state.volume_in, 1e-30}));
}

TEST_CASE("measure: constant and linear fields, noise statistics") {
  TruthPlantConfig cfg = default_cfg();
  TruthPlantState state = initial_state(cfg, q_nominal(0.0));
  for (std::size_t i = 1; i < state.h_field.rows(); ++i)
    for (std::size_t j = 0; j < state.h_field.cols(); ++j) state.h_field(i, j) = 8.7e-5;
  const std::vector<double> flat = measure(state, cfg);
  for (double v : flat) CHECK(v == doctest::Approx(8.7e-5).epsilon(1e-12));

  // linear in y: disc average reads the centre value
  const double slope = 1e-3;
  for (std::size_t i = 1; i < state.h_field.rows(); ++i)
    for (std::size_t j = 0; j < state.h_field.cols(); ++j) {
      const double y = (j + 0.5) * cfg.dy();
      state.h_field(i, j) = 5e-5 + slope * y;
    }
  const std::vector<double> lin = measure(state, cfg);
  for (std::size_t s = 0; s < lin.size(); ++s) {
    const double expect = 5e-5 + slope * cfg.geometry.stripe_centers[s];
    CHECK(lin[s] == doctest::Approx(expect).epsilon(1e-6));
  }

  // seeded noise: sample std within 5% over 1e4 draws
  cfg.noise_std = 1e-7;
  NormalSampler rng(99);
  double sum = 0.0, sumsq = 0.0;
  const int trials = 10000;
  const double centre = 5e-5 + slope * cfg.geometry.stripe_centers[2];
  for (int t = 0; t < trials; ++t) {
    const double v = measure(state, cfg, &rng)[2];
    sum += v - centre;
    sumsq += (v - centre) * (v - centre);
  }
  const double var = (sumsq - sum * sum / trials) / (trials - 1);
  CHECK(std::sqrt(var) == doctest::Approx(1e-7).epsilon(0.05));
}

TEST_CASE("run_experiment: constant input stays at the steady point") {
  TruthPlantConfig cfg = default_cfg();
  cfg.noise_std = 0.0;
  SignalLog q_log;
  q_log.sample_time = 0.01;
  q_log.frame = Frame::absolute;
  q_log.inputs = Matrix(5, 60);
  q_log.outputs = Matrix(5, 60);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 60; ++k) q_log.inputs(i, k) = 1.0e-6;

  const ExperimentResult res = run_experiment(cfg, q_nominal(), q_log, 0.01);
  CHECK(res.log.samples() == 60);
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 60; ++k)
      CHECK(res.log.outputs(j, k) == doctest::Approx(res.h0[j]).epsilon(1e-10));

  // Ts must divide into sim steps
  CHECK_THROWS_AS(run_experiment(cfg, q_nominal(), q_log, 0.0105), ValidationError);
}

TEST_CASE("run_experiment: determinism and plant linearity") {
  TruthPlantConfig cfg = default_cfg();
  SignalLog q_log;
  q_log.sample_time = 0.01;
  q_log.frame = Frame::absolute;
  q_log.inputs = Matrix(5, 50);
  q_log.outputs = Matrix(5, 50);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 50; ++k)
      q_log.inputs(i, k) = 1.0e-6 * (1.0 + ((k / 5 + i) % 2 ? 0.1 : -0.1));

  const ExperimentResult a = run_experiment(cfg, q_nominal(), q_log, 0.01);
  const ExperimentResult b = run_experiment(cfg, q_nominal(), q_log, 0.01);
  CHECK(a.log.outputs.data() == b.log.outputs.data());  // bit-identical

  // linearity in q (noise off): doubling the deviation doubles the response
  cfg.noise_std = 0.0;
  const ExperimentResult base = run_experiment(cfg, q_nominal(), q_log, 0.01);
  SignalLog doubled = q_log;
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 50; ++k)
      doubled.inputs(i, k) = 1.0e-6 + 2.0 * (q_log.inputs(i, k) - 1.0e-6);
  const ExperimentResult twice = run_experiment(cfg, q_nominal(), doubled, 0.01);
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 50; ++k) {
      const double dev1 = base.log.outputs(j, k) - base.h0[j];
      const double dev2 = twice.log.outputs(j, k) - twice.h0[j];
      CHECK(dev2 == doctest::Approx(2.0 * dev1).epsilon(1e-9));
    }
}

TEST_CASE("lateral symmetry: mirrored flows produce mirrored thicknesses") {
  TruthPlantConfig cfg = default_cfg();
  cfg.noise_std = 0.0;
  const std::vector<double> q{1.3e-6, 0.8e-6, 1.0e-6, 1.1e-6, 0.9e-6};
  const std::vector<double> q_mirror(q.rbegin(), q.rend());
  const std::vector<double> h = steady_thickness(cfg, q);
  const std::vector<double> hm = steady_thickness(cfg, q_mirror);
  for (int j = 0; j < 5; ++j) CHECK(h[j] == doctest::Approx(hm[4 - j]).epsilon(1e-10));
}

TEST_CASE("dc_sensitivity: advection-only diagonal and diffusive coupling") {
  TruthPlantConfig cfg = default_cfg();
  cfg.noise_std = 0.0;
  cfg.lateral_diffusivity = 0.0;
  const CrossGain diag = dc_sensitivity(cfg, q_nominal(), 1e-8);
  CHECK(diag.provenance == GainProvenance::finite_difference);
  const double expect = 1.0 / (0.03 * 0.333);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) {
      if (i == j)
        CHECK(diag.h(j, i) == doctest::Approx(expect).epsilon(1e-6));
      else
        CHECK(std::abs(diag.h(j, i)) <= 1e-6 * expect);
    }

  cfg.lateral_diffusivity = 1.0878e-3;
  const CrossGain coupled = dc_sensitivity(cfg, q_nominal(), 1e-8);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) {
      CHECK(coupled.h(j, i) == doctest::Approx(coupled.h(i, j)).epsilon(1e-6));
      if (std::abs(i - j) == 1) CHECK(coupled.h(j, i) > 0.0);
    }

  // linearity: eps and eps/2 agree to rounding level
  const CrossGain half = dc_sensitivity(cfg, q_nominal(), 5e-9);
  CHECK(frobenius_norm(half.h - coupled.h) <= 1e-6 * frobenius_norm(coupled.h));
}

TEST_CASE("diffusion spread ties to the kernel family: ell = sqrt(2 D_y L)") {
  TruthPlantConfig cfg = default_cfg();
  cfg.noise_std = 0.0;
  const double transit = cfg.geometry.transport_delay();
  const double ell_target = 0.014;
  cfg.lateral_diffusivity = ell_target * ell_target / (2.0 * transit);
  const CrossGain oracle = dc_sensitivity(cfg, q_nominal(), 1e-8);

  CrossGain as_identified;
  as_identified.provenance = GainProvenance::identified;
  as_identified.h = oracle.h;
  const CalibrationResult cal = calibrate(as_identified, cfg.geometry, 1e-4, 1e-1, 1e-7);
  CHECK(cal.rel_error <= 0.1);
  CHECK(cal.ell_star == doctest::Approx(ell_target).epsilon(0.15));
}
