#pragma once

#include <variant>
#include <vector>

#include "truthplant.hpp"

namespace coatline {

/// Decoupling proportional controller K_P = beta * Hhat^{-1}.
struct PController {
  Matrix k_p;  // [(m^3/s)/m]
  double beta = 0.0;
};

PController design_p(const CrossGain &h_hat, double beta);

/// Deviation reference driving every absolute thickness to h_target under
/// the beta/(1+beta) closed-loop tracking fraction.
std::vector<double> shape_reference(double h_target, const OperatingPoint &op, double beta);

/// IMC controller: singular-value-floored static post-compensator
/// D = V S_eff^{-1} U^T and the biproper scalar filter
/// Q(s) = (s^2 + c1 s + c0)/(lambda s + 1)^2, realized as feedthrough
/// 1/lambda^2 plus a strictly proper remainder. The controller carries the
/// internal model (surrogate + gain) of the classic IMC structure.
struct ImcController {
  double lambda = 0.0;          // [s]
  double floor_fraction = 0.0;
  Matrix d;                     // post-compensator
  std::vector<double> s_raw;    // singular values of Hhat
  std::vector<double> s_eff;    // floored singular values
  ScalarSurrogate model_scalar;
  CrossGain model_gain;

  double feedthrough() const { return 1.0 / (lambda * lambda); }
  /// Strictly proper remainder Q - 1/lambda^2 in the shared second-order form.
  ScalarSurrogate remainder() const;
};

ImcController design_imc(const CrossGain &h_hat, const ScalarSurrogate &s, double lambda,
                         double floor_fraction);

using ControllerSpec = std::variant<PController, ImcController>;

/// Plant selection for the loop: the factored surrogate or the truth plant.
struct SurrogatePlant {
  ScalarSurrogate scalar;
  CrossGain gain;
};
struct TruthPlant {
  TruthPlantConfig config;
  bool measurement_noise = false;
};
using PlantSpec = std::variant<SurrogatePlant, TruthPlant>;

struct LoopOptions {
  double horizon = 30.0;      // [s]
  double sample_time = 0.01;  // [s]
  bool clamp_actuation = false;  // q in [0, 2 q0] when enabled
};

struct ClosedLoopResult {
  SignalLog log;                       // absolute frame
  std::vector<double> final_values;    // mean over the last 10% of the horizon [m]
  std::vector<double> overshoot;       // excursion beyond the final value / |net change|
  std::vector<double> settling_time;   // 2%-of-net-change definition [s]
};

/// Unity-feedback loop at the measurement period: dh(k) is measured first,
/// dq(k) = ctrl(dh_ref - dh(k)) is held over [k, k+1); no computation delay
/// is added beyond the zero-order hold. Diverging loops (|dh| beyond 100x
/// the reference magnitude) abort with a NumericError.
ClosedLoopResult simulate_closed_loop(const PlantSpec &plant, const ControllerSpec &ctrl,
                                      const std::vector<double> &dh_ref,
                                      const OperatingPoint &op, const LoopOptions &opts);

} // namespace coatline
