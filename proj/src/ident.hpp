#pragma once

#include <cstdint>

#include "dynamics.hpp"

namespace coatline {

/// PRBS excitation design: each inlet toggles around its nominal flow by
/// +-amplitude_fraction, bits held for bit_duration.
struct PrbsSpec {
  double amplitude_fraction = 0.10;
  double bit_duration = 0.01;   // [s]
  double total_duration = 2.0;  // [s]
  std::uint64_t base_seed = 1;

  void validate(double sample_time) const;
};

SignalLog design_prbs(const PrbsSpec &spec, const OperatingPoint &op, double sample_time);

struct FitReport {
  std::vector<double> rmse;       // per channel [m]
  std::vector<double> r_squared;  // per channel; NaN when the channel has no variance
  Matrix residuals;               // n x N [m]
};

/// Options for the nonlinear (c0, c1) search: coarse log grid then
/// Nelder-Mead refinement in log coordinates.
struct SisoFitOptions {
  double c0_lo = 1e2, c0_hi = 1e6;
  double c1_lo = 1e0, c1_hi = 1e4;
  int grid_points = 17;
  double refine_tol = 1e-6;
  int max_refine_iters = 400;
};

struct DelayEstimate {
  double dead_time = 0.0;  // L_id = d Ts [s]
  int delay_samples = 0;   // d
};

/// Exhaustive integer-shift search: the full SISO fit is run at every
/// candidate d in [0, d_max] and the residual SSE decides.
DelayEstimate estimate_delay(const SignalLog &dev_log, std::size_t channel, int d_max,
                             const SisoFitOptions &opts = {});

/// Output-error fit of the normalized surrogate (b0 = c0, b1 = 0, L = d Ts)
/// on one channel: the candidate model is ZOH-simulated over the record and
/// the static gain is concentrated out by least squares, so the pole
/// estimates are invariant to output scaling.
ScalarSurrogate fit_siso(const SignalLog &dev_log, std::size_t channel, int d,
                         double sample_time, const SisoFitOptions &opts = {});

/// Row-by-row least squares of outputs against the G-filtered inlet
/// regressors r_i = (G * dq_i).
CrossGain fit_h(const SignalLog &dev_log, const ScalarSurrogate &s, double sample_time);

/// RMSE and R^2 of the factored model against a deviation-frame record.
FitReport validate_fit(const SignalLog &dev_log, const ScalarSurrogate &s, const CrossGain &gain);

} // namespace coatline
