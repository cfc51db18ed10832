#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace coatline {

/// Slot-die / sensor layout. All lengths in metres, speeds in m/s; the CLI
/// converts to mm and um only at the boundary.
struct Geometry {
  std::size_t n_inlets = 0;
  std::vector<double> stripe_centers;  // y_i [m], ascending
  double stripe_width = 0.0;           // w_s [m]
  double channel_height = 0.0;         // h_ch [m]
  double sensor_station = 0.0;         // x_s [m]
  double sensor_radius = 0.0;          // r_c [m]
  double coating_width = 0.0;          // w [m]
  double web_speed = 0.0;              // U0 [m/s]

  void validate() const;

  /// Convective transport delay L = x_s / U0 [s].
  double transport_delay() const { return sensor_station / web_speed; }
};

/// The configuration used throughout: five 30 mm stripes tiling a 150 mm
/// width, sensors 30 mm downstream, web at 0.333 m/s.
Geometry default_geometry();

struct OperatingPoint {
  std::vector<double> q0;  // nominal inlet flows [m^3/s]
  std::vector<double> h0;  // nominal sensor thicknesses [m]

  void validate(std::size_t n_inlets) const;
};

enum class Frame { absolute, deviation };

/// Uniformly sampled multichannel record of inlet flows and thicknesses.
struct SignalLog {
  double sample_time = 0.0;  // Ts [s]
  Frame frame = Frame::absolute;
  Matrix inputs;   // n x N flows [m^3/s]
  Matrix outputs;  // n x N thicknesses [m]

  std::size_t channels() const { return inputs.rows(); }
  std::size_t samples() const { return inputs.cols(); }

  void validate() const;
};

SignalLog to_deviation(const SignalLog &log, const OperatingPoint &op);
SignalLog to_absolute(const SignalLog &log, const OperatingPoint &op);

/// CSV layout: header `t,q1..qn,h1..hn`, time in seconds at fixed step,
/// flows in m^3/s, thicknesses in m, shortest round-trip decimals.
void write_signal_log_csv(const SignalLog &log, const std::string &path);
SignalLog read_signal_log_csv(const std::string &path);

} // namespace coatline
