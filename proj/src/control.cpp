#include "control.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace coatline {

PController design_p(const CrossGain &h_hat, double beta) {
  h_hat.validate();
  if (!(beta > 0.0)) throw ValidationError("design_p: beta must be positive");
  PController ctrl;
  ctrl.beta = beta;
  try {
    ctrl.k_p = beta * inverse(h_hat.h);
  } catch (const NumericError &e) {
    std::ostringstream msg;
    msg << "design_p: gain matrix is singular or near-singular (" << e.what()
        << "); use the IMC design with a singular-value floor instead";
    throw NumericError(msg.str(), e.condition_estimate());
  }
  // K_P = beta Hhat^{-1} by construction.
  const Matrix loop = h_hat.h * ctrl.k_p;
  const std::size_t n = loop.rows();
  const double resid = frobenius_norm(loop - beta * Matrix::identity(n));
  if (resid > 1e-8 * beta * static_cast<double>(n))
    throw NumericError("design_p: inverse verification failed");
  return ctrl;
}

std::vector<double> shape_reference(double h_target, const OperatingPoint &op, double beta) {
  if (!(beta > 0.0)) throw ValidationError("shape_reference: beta must be positive");
  op.validate(op.q0.size());
  const double fraction = beta / (1.0 + beta);
  std::vector<double> ref(op.h0.size());
  for (std::size_t j = 0; j < ref.size(); ++j) ref[j] = (h_target - op.h0[j]) / fraction;
  return ref;
}

ScalarSurrogate ImcController::remainder() const {
  // Q(s) - 1/lambda^2 = [(c1 - 2/lambda)s + (c0 - 1/lambda^2)] / (lambda s + 1)^2
  //                   = (b1 s + b0) / (s^2 + (2/lambda)s + 1/lambda^2)
  // with b1, b0 scaled by 1/lambda^2 from expanding the denominator.
  const double il = 1.0 / lambda;
  ScalarSurrogate r;
  r.dead_time = 0.0;
  r.c1 = 2.0 * il;
  r.c0 = il * il;
  r.b1 = (model_scalar.c1 - 2.0 * il) * il * il;
  r.b0 = (model_scalar.c0 - il * il) * il * il;
  r.validate();
  return r;
}

ImcController design_imc(const CrossGain &h_hat, const ScalarSurrogate &s, double lambda,
                         double floor_fraction) {
  h_hat.validate();
  s.validate();
  if (!(lambda > 0.0)) throw ValidationError("design_imc: lambda must be positive");
  if (!(floor_fraction > 0.0) || floor_fraction > 1.0)
    throw ValidationError("design_imc: floor fraction must lie in (0, 1]");

  const SvdResult dec = svd(h_hat.h);
  const double floor = floor_fraction * dec.s.front();
  if (!(floor > 0.0)) throw NumericError("design_imc: zero gain matrix");

  ImcController ctrl;
  ctrl.lambda = lambda;
  ctrl.floor_fraction = floor_fraction;
  ctrl.s_raw = dec.s;
  ctrl.s_eff.resize(dec.s.size());
  for (std::size_t k = 0; k < dec.s.size(); ++k) ctrl.s_eff[k] = std::max(dec.s[k], floor);

  Matrix vsinv = dec.v;
  for (std::size_t j = 0; j < vsinv.cols(); ++j)
    for (std::size_t i = 0; i < vsinv.rows(); ++i) vsinv(i, j) /= ctrl.s_eff[j];
  ctrl.d = vsinv * transpose(dec.u);
  ctrl.model_scalar = s;
  ctrl.model_gain = h_hat;
  return ctrl;
}

namespace {

// Discrete plant interface for the loop.
class LoopPlant {
public:
  virtual ~LoopPlant() = default;
  virtual std::vector<double> measure_deviation() = 0;
  virtual void apply(const std::vector<double> &dq) = 0;
};

class SurrogateLoopPlant : public LoopPlant {
public:
  SurrogateLoopPlant(const SurrogatePlant &p, double sample_time)
      : gain_(p.gain) {
    const DiscreteFilter proto(p.scalar, sample_time);
    filters_.assign(gain_.h.rows(), proto);
  }

  std::vector<double> measure_deviation() override {
    std::vector<double> r(filters_.size());
    for (std::size_t i = 0; i < filters_.size(); ++i) r[i] = filters_[i].output();
    return gain_.h * r;
  }

  void apply(const std::vector<double> &dq) override {
    for (std::size_t i = 0; i < filters_.size(); ++i) filters_[i].step(dq[i]);
  }

private:
  CrossGain gain_;
  std::vector<DiscreteFilter> filters_;
};

class TruthLoopPlant : public LoopPlant {
public:
  TruthLoopPlant(const TruthPlant &p, const OperatingPoint &op, double sample_time)
      : cfg_(p.config), op_(op),
        noise_(p.measurement_noise ? std::make_unique<NormalSampler>(p.config.rng_seed) : nullptr) {
    cfg_.validate();
    const double ratio = sample_time / cfg_.sim_dt;
    substeps_ = std::lround(ratio);
    if (substeps_ < 1 || std::abs(ratio - static_cast<double>(substeps_)) > 1e-9)
      throw ValidationError("closed loop: Ts must be an integer multiple of sim_dt");
    state_ = initial_state(cfg_, op.q0);
    const std::size_t warm =
        static_cast<std::size_t>(std::lround(cfg_.warmup_time / cfg_.sim_dt));
    for (std::size_t k = 0; k < warm; ++k) step_truth(state_, op.q0, cfg_);
  }

  std::vector<double> measure_deviation() override {
    std::vector<double> h = measure(state_, cfg_, noise_.get());
    for (std::size_t j = 0; j < h.size(); ++j) h[j] -= op_.h0[j];
    return h;
  }

  void apply(const std::vector<double> &dq) override {
    std::vector<double> q(dq.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = op_.q0[i] + dq[i];
    for (long m = 0; m < substeps_; ++m) step_truth(state_, q, cfg_);
  }

private:
  TruthPlantConfig cfg_;
  OperatingPoint op_;
  std::unique_ptr<NormalSampler> noise_;
  TruthPlantState state_;
  long substeps_ = 0;
};

// Discrete controller interface: maps the error vector to the actuation.
class LoopController {
public:
  virtual ~LoopController() = default;
  virtual std::vector<double> control(const std::vector<double> &error) = 0;
};

class PLoopController : public LoopController {
public:
  explicit PLoopController(const PController &c) : ctrl_(c) {}
  std::vector<double> control(const std::vector<double> &error) override {
    return ctrl_.k_p * error;
  }

private:
  PController ctrl_;
};

// Classic IMC structure: u = D Q(e + y_model), where y_model is the internal
// model output driven by the same actuation. With a perfect model the error
// feedback cancels and the loop behaves as the designed e^{-Ls}/(lambda s+1)^2
// reference filter times Hhat D.
class ImcLoopController : public LoopController {
public:
  ImcLoopController(const ImcController &c, double sample_time)
      : ctrl_(c),
        model_proto_(c.model_scalar, sample_time),
        remainder_proto_(c.remainder(), sample_time) {
    const std::size_t n = c.model_gain.h.rows();
    model_filters_.assign(n, model_proto_);
    q_filters_.assign(n, remainder_proto_);
  }

  std::vector<double> control(const std::vector<double> &error) override {
    const std::size_t n = model_filters_.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = model_filters_[i].output();
    const std::vector<double> y_model = ctrl_.model_gain.h * r;
    std::vector<double> v(n), w(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = error[j] + y_model[j];
    for (std::size_t j = 0; j < n; ++j)
      w[j] = ctrl_.feedthrough() * v[j] + q_filters_[j].step(v[j]);
    const std::vector<double> u = ctrl_.d * w;
    for (std::size_t i = 0; i < n; ++i) model_filters_[i].step(u[i]);
    return u;
  }

private:
  ImcController ctrl_;
  DiscreteFilter model_proto_;
  DiscreteFilter remainder_proto_;
  std::vector<DiscreteFilter> model_filters_;
  std::vector<DiscreteFilter> q_filters_;
};

} // namespace

ClosedLoopResult simulate_closed_loop(const PlantSpec &plant, const ControllerSpec &ctrl,
                                      const std::vector<double> &dh_ref,
                                      const OperatingPoint &op, const LoopOptions &opts) {
  const std::size_t n = dh_ref.size();
  op.validate(n);
  if (!(opts.horizon > 0.0) || !(opts.sample_time > 0.0))
    throw ValidationError("closed loop: horizon and sample time must be positive");

  std::unique_ptr<LoopPlant> loop_plant;
  if (std::holds_alternative<SurrogatePlant>(plant)) {
    const auto &sp = std::get<SurrogatePlant>(plant);
    if (sp.gain.h.rows() != n) throw ValidationError("closed loop: reference length differs");
    loop_plant = std::make_unique<SurrogateLoopPlant>(sp, opts.sample_time);
  } else {
    loop_plant = std::make_unique<TruthLoopPlant>(std::get<TruthPlant>(plant), op, opts.sample_time);
  }

  std::unique_ptr<LoopController> loop_ctrl;
  if (std::holds_alternative<PController>(ctrl)) {
    const auto &pc = std::get<PController>(ctrl);
    if (pc.k_p.rows() != n) throw ValidationError("closed loop: controller dimension differs");
    loop_ctrl = std::make_unique<PLoopController>(pc);
  } else {
    const auto &ic = std::get<ImcController>(ctrl);
    if (ic.d.rows() != n) throw ValidationError("closed loop: controller dimension differs");
    loop_ctrl = std::make_unique<ImcLoopController>(ic, opts.sample_time);
  }

  const std::size_t big_n =
      static_cast<std::size_t>(std::lround(opts.horizon / opts.sample_time));
  if (big_n < 10) throw ValidationError("closed loop: horizon too short");

  double ref_scale = 0.0;
  for (double r : dh_ref) ref_scale = std::max(ref_scale, std::abs(r));
  const double divergence_limit = 100.0 * std::max(ref_scale, 1e-9);

  SignalLog log;
  log.sample_time = opts.sample_time;
  log.frame = Frame::absolute;
  log.inputs = Matrix(n, big_n);
  log.outputs = Matrix(n, big_n);

  std::vector<double> error(n), dq(n);
  for (std::size_t k = 0; k < big_n; ++k) {
    const std::vector<double> dh = loop_plant->measure_deviation();
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(dh[j]) > divergence_limit) {
        std::ostringstream msg;
        msg << "closed loop diverged: |dh[" << j << "]| = " << std::abs(dh[j]) << " m at t = "
            << k * opts.sample_time << " s (limit " << divergence_limit << " m)";
        throw NumericError(msg.str());
      }
      error[j] = dh_ref[j] - dh[j];
    }
    dq = loop_ctrl->control(error);
    if (opts.clamp_actuation) {
      for (std::size_t i = 0; i < n; ++i)
        dq[i] = std::clamp(op.q0[i] + dq[i], 0.0, 2.0 * op.q0[i]) - op.q0[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      log.inputs(j, k) = op.q0[j] + dq[j];
      log.outputs(j, k) = op.h0[j] + dh[j];
    }
    loop_plant->apply(dq);
  }

  ClosedLoopResult result;
  result.final_values.resize(n);
  result.overshoot.resize(n);
  result.settling_time.resize(n);
  const std::size_t tail_start = big_n - std::max<std::size_t>(1, big_n / 10);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = tail_start; k < big_n; ++k) acc += log.outputs(j, k);
    const double final_value = acc / static_cast<double>(big_n - tail_start);
    result.final_values[j] = final_value;

    const double start = op.h0[j];
    const double net = final_value - start;
    double beyond = 0.0;
    for (std::size_t k = 0; k < big_n; ++k) {
      const double exc = (log.outputs(j, k) - final_value) * (net >= 0.0 ? 1.0 : -1.0);
      beyond = std::max(beyond, exc);
    }
    result.overshoot[j] = net != 0.0 ? beyond / std::abs(net) : 0.0;

    const double band = 0.02 * std::abs(net);
    std::size_t settle_idx = 0;
    for (std::size_t k = big_n; k-- > 0;) {
      if (std::abs(log.outputs(j, k) - final_value) > band) {
        settle_idx = k + 1;
        break;
      }
    }
    result.settling_time[j] = static_cast<double>(settle_idx) * opts.sample_time;
  }
  result.log = std::move(log);
  return result;
}

} // namespace coatline
