#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "core.hpp"
#include "kernelmap.hpp"

namespace coatline {

/// Dead-time second-order transfer function
///   G(s) = e^{-Ls} (b0 + b1 s) / (s^2 + c1 s + c0).
/// The normalized construction (b0 = c0, b1 = 0) has unit DC gain.
struct ScalarSurrogate {
  double dead_time = 0.0;  // L [s]
  double b0 = 0.0;
  double b1 = 0.0;
  double c0 = 0.0;  // [1/s^2]
  double c1 = 0.0;  // [1/s]

  static ScalarSurrogate normalized(double dead_time, double c0, double c1);

  double dc_gain() const { return b0 / c0; }
  void validate() const;
};

/// L = x_s/U0 from the geometry, unit-DC numerator.
ScalarSurrogate surrogate_from_geometry(const Geometry &g, double c0, double c1);

/// Exact zero-order-hold discretization of the rational part plus an
/// integer-sample FIFO for the dead time. For piecewise-constant inputs the
/// sampled output equals the continuous response at every sample instant.
///
/// Step semantics per sample k: output(k) is read first (it reflects inputs
/// up to k-1), then the new input u(k) is pushed. A filter instance carries
/// mutable state and must stay on one thread; distinct instances are
/// independent.
class DiscreteFilter {
public:
  DiscreteFilter(const ScalarSurrogate &s, double sample_time);

  double sample_time() const { return ts_; }
  int delay_samples() const { return delay_; }
  bool delay_was_rounded() const { return delay_rounded_; }
  double dc_gain() const;

  /// Output at the current sample, then advance with input u.
  double step(double u);
  /// Output at the current sample without advancing.
  double output() const { return c_[0] * state_[0] + c_[1] * state_[1]; }
  void reset();

  /// Zero-state filtering of a whole record (does not disturb this
  /// instance's state).
  std::vector<double> filter(const std::vector<double> &u) const;

  // ZOH state-space (companion form), exposed for tests.
  std::array<double, 4> ad() const { return ad_; }
  std::array<double, 2> bd() const { return bd_; }
  std::array<double, 2> c() const { return c_; }

private:
  double ts_ = 0.0;
  int delay_ = 0;
  bool delay_rounded_ = false;
  std::array<double, 4> ad_{};  // row-major 2x2
  std::array<double, 2> bd_{};
  std::array<double, 2> c_{};
  std::array<double, 2> state_{};
  std::vector<double> fifo_;
  std::size_t fifo_pos_ = 0;
};

/// Factored MIMO response: each input channel filtered through the shared
/// G (delay included), then mixed by H. Input and output logs are in the
/// deviation frame, zero initial conditions.
SignalLog simulate_mimo(const ScalarSurrogate &s, const CrossGain &gain, const SignalLog &dq);

} // namespace coatline
