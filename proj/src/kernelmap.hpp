#pragma once

#include <string>

#include "core.hpp"

namespace coatline {

/// Gaussian spreading-kernel parameters: kappa sets the overall scale,
/// ell the lateral spread [m].
struct KernelParams {
  double kappa = 0.0;
  double ell = 0.0;

  void validate() const;
};

enum class GainProvenance { kernel, identified, finite_difference };

/// n x n cross-directional DC gain matrix, entries in m/(m^3/s).
struct CrossGain {
  Matrix h;
  GainProvenance provenance = GainProvenance::identified;

  void validate() const;
};

struct CalibrationResult {
  double kappa_star = 0.0;
  double ell_star = 0.0;   // [m]
  double rel_error = 0.0;  // ||Hhat - kappa* H0(ell*)||_F / ||Hhat||_F
};

/// Closed-form gain from inlet stripe i to (point) sensor j:
///   (kappa sqrt(pi/2) ell / w_s) [erf((y_i + w_s/2 - y_j)/(sqrt2 ell))
///                               - erf((y_i - w_s/2 - y_j)/(sqrt2 ell))]
double kernel_entry(std::size_t j, std::size_t i, const KernelParams &p, const Geometry &g);

CrossGain build_h_pde(const KernelParams &p, const Geometry &g);

/// Frobenius projection coefficient of Hhat onto the unit-scale family
/// H0(ell) = H(1, ell).
double kappa_star(const CrossGain &h_hat, double ell, const Geometry &g);

/// Scans ell over [ell_lo, ell_hi] (33-point log grid + golden section) for
/// the spread minimizing ||Hhat - kappa*(ell) H0(ell)||_F.
CalibrationResult calibrate(const CrossGain &h_hat, const Geometry &g, double ell_lo,
                            double ell_hi, double tol);

void write_cross_gain_csv(const CrossGain &gain, const std::string &path);
CrossGain read_cross_gain_csv(const std::string &path, GainProvenance provenance);

} // namespace coatline
