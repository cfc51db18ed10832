#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "ident.hpp"
#include "truthplant.hpp"

using namespace coatline;

namespace {

OperatingPoint paper_op() {
  OperatingPoint op;
  op.q0 = std::vector<double>(5, 1.0e-6);
  op.h0 = std::vector<double>(5, 1.0e-4);
  return op;
}

Matrix paper_h_hat() {
  const double vals[25] = {49.38, 1.03,  7.41,  16.54, 14.53,  //
                           9.45,  43.59, 11.75, 10.76, 13.14,  //
                           1.39,  5.58,  52.63, 13.37, 15.49,  //
                           3.34,  13.50, 6.08,  53.15, 12.61,  //
                           0.16,  4.64,  11.19, 18.51, 54.84};
  Matrix m(5, 5);
  for (int k = 0; k < 25; ++k) m.data()[k] = vals[k];
  return m;
}

// Deviation-frame PRBS drive through the factored surrogate model.
SignalLog surrogate_dataset(const ScalarSurrogate &s, const Matrix &h, std::uint64_t seed,
                            double noise_std = 0.0) {
  const std::size_t n = h.rows();
  OperatingPoint op;
  op.q0 = std::vector<double>(n, 1.0e-6);
  op.h0 = std::vector<double>(n, 1.0e-4);
  PrbsSpec spec;
  spec.base_seed = seed;
  const SignalLog abs_q = design_prbs(spec, op, 0.01);
  const SignalLog dev_q = to_deviation(abs_q, op);
  CrossGain gain;
  gain.provenance = GainProvenance::identified;
  gain.h = h;
  SignalLog data = simulate_mimo(s, gain, dev_q);
  if (noise_std > 0.0) {
    NormalSampler rng(seed + 1000);
    for (double &v : data.outputs.data()) v += noise_std * rng.next();
  }
  return data;
}

} // namespace

TEST_CASE("design_prbs: levels, sample count, degenerate amplitude") {
  PrbsSpec spec;
  const OperatingPoint op = paper_op();
  const SignalLog log = design_prbs(spec, op, 0.01);
  CHECK(log.samples() == 200);
  CHECK(log.channels() == 5);
  CHECK(log.frame == Frame::absolute);
  for (double v : log.inputs.data())
    CHECK((v == doctest::Approx(0.9e-6) || v == doctest::Approx(1.1e-6)));

  PrbsSpec flat = spec;
  flat.amplitude_fraction = 0.0;
  const SignalLog same = design_prbs(flat, op, 0.01);
  for (double v : same.inputs.data()) CHECK(v == doctest::Approx(1.0e-6));

  PrbsSpec bad = spec;
  bad.total_duration = 0.1;
  CHECK_THROWS_AS(design_prbs(bad, op, 0.01), ValidationError);
}

TEST_CASE("design_prbs: channel cross-correlation stays small") {
  const SignalLog log = design_prbs(PrbsSpec{}, paper_op(), 0.01);
  const std::size_t n_samples = log.samples();
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b) {
      double ma = 0.0, mb = 0.0;
      for (std::size_t k = 0; k < n_samples; ++k) {
        ma += log.inputs(a, k);
        mb += log.inputs(b, k);
      }
      ma /= n_samples;
      mb /= n_samples;
      double cab = 0.0, caa = 0.0, cbb = 0.0;
      for (std::size_t k = 0; k < n_samples; ++k) {
        cab += (log.inputs(a, k) - ma) * (log.inputs(b, k) - mb);
        caa += (log.inputs(a, k) - ma) * (log.inputs(a, k) - ma);
        cbb += (log.inputs(b, k) - mb) * (log.inputs(b, k) - mb);
      }
      CHECK(std::abs(cab / std::sqrt(caa * cbb)) < 0.2);
    }
}

TEST_CASE("estimate_delay: exact on surrogate data, shifts with the input") {
  const ScalarSurrogate truth = ScalarSurrogate::normalized(0.09, 1.87e4, 1.97e2);
  const SignalLog data = surrogate_dataset(truth, paper_h_hat(), 7);

  const DelayEstimate est = estimate_delay(data, 2, 30);
  CHECK(est.delay_samples == 9);
  CHECK(est.dead_time == doctest::Approx(0.09).epsilon(1e-12));

  // shifting the input by +3 samples shifts the estimate by exactly 3
  SignalLog shifted = data;
  shifted.inputs = Matrix(5, data.samples());
  for (int i = 0; i < 5; ++i)
    for (std::size_t k = 3; k < data.samples(); ++k)
      shifted.inputs(i, k) = data.inputs(i, k - 3);
  const DelayEstimate est3 = estimate_delay(shifted, 2, 30);
  CHECK(est3.delay_samples == 12);

  // flat input is rejected
  SignalLog flat = data;
  for (double &v : flat.inputs.data()) v = 0.0;
  CHECK_THROWS_AS(estimate_delay(flat, 2, 30), ValidationError);
  CHECK_THROWS_AS(estimate_delay(data, 2, 80), ValidationError);
}

TEST_CASE("delay/fit separation: SSE strictly minimized at the true shift") {
  const ScalarSurrogate truth = ScalarSurrogate::normalized(0.09, 1.87e4, 1.97e2);
  // single-channel dataset: the SISO residual at the true d is exactly zero
  Matrix h1(1, 1);
  h1(0, 0) = 47.0;
  const SignalLog data = surrogate_dataset(truth, h1, 11);

  std::vector<double> u(data.samples()), y(data.samples());
  for (std::size_t k = 0; k < data.samples(); ++k) {
    u[k] = data.inputs(0, k);
    y[k] = data.outputs(0, k);
  }
  double sse_true = 0.0;
  std::vector<double> sses;
  for (int d = 6; d <= 12; ++d) {
    const ScalarSurrogate fit = fit_siso(data, 0, d, 0.01);
    const DiscreteFilter f(fit, 0.01);
    const std::vector<double> r = f.filter(u);
    double rr = 0.0, ry = 0.0, yy = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      rr += r[k] * r[k];
      ry += r[k] * y[k];
      yy += y[k] * y[k];
    }
    const double sse = yy - ry * ry / rr;
    sses.push_back(sse);
    if (d == 9) sse_true = sse;
  }
  for (std::size_t i = 0; i < sses.size(); ++i) {
    if (i != 3) CHECK(sse_true < sses[i]);
  }
}

TEST_CASE("fit_siso: noise-free self-consistency round trip") {
  const ScalarSurrogate truth = ScalarSurrogate::normalized(0.09, 1.87e4, 1.97e2);
  Matrix h1(1, 1);
  h1(0, 0) = 47.0;
  const SignalLog data = surrogate_dataset(truth, h1, 13);
  const ScalarSurrogate fit = fit_siso(data, 0, 9, 0.01);
  CHECK(fit.c0 == doctest::Approx(1.87e4).epsilon(1e-3));
  CHECK(fit.c1 == doctest::Approx(1.97e2).epsilon(1e-3));
  CHECK(fit.b0 == fit.c0);
  CHECK(fit.b1 == 0.0);

  // output scaling leaves the pole estimates unchanged
  SignalLog scaled = data;
  for (double &v : scaled.outputs.data()) v *= 2.0;
  const ScalarSurrogate fit2 = fit_siso(scaled, 0, 9, 0.01);
  CHECK(fit2.c0 == doctest::Approx(fit.c0).epsilon(1e-9));
  CHECK(fit2.c1 == doctest::Approx(fit.c1).epsilon(1e-9));
}

TEST_CASE("fit_h: exact linear round trip and trivial cases") {
  const ScalarSurrogate truth = ScalarSurrogate::normalized(0.09, 1.87e4, 1.97e2);
  const Matrix h_star = paper_h_hat();
  const SignalLog data = surrogate_dataset(truth, h_star, 17);
  const CrossGain fitted = fit_h(data, truth, 0.01);
  CHECK(fitted.provenance == GainProvenance::identified);
  CHECK(frobenius_norm(fitted.h - h_star) <= 1e-8 * frobenius_norm(h_star));

  SignalLog zero_out = data;
  for (double &v : zero_out.outputs.data()) v = 0.0;
  const CrossGain zero_fit = fit_h(zero_out, truth, 0.01);
  CHECK(frobenius_norm(zero_fit.h) <= 1e-12 * frobenius_norm(h_star));
}

TEST_CASE("fit_h: permuting output channels permutes the rows") {
  const ScalarSurrogate truth = ScalarSurrogate::normalized(0.09, 1.87e4, 1.97e2);
  const SignalLog data = surrogate_dataset(truth, paper_h_hat(), 19);
  const CrossGain base = fit_h(data, truth, 0.01);

  const std::array<int, 5> perm{3, 0, 4, 1, 2};
  SignalLog permuted = data;
  for (int j = 0; j < 5; ++j)
    for (std::size_t k = 0; k < data.samples(); ++k)
      permuted.outputs(j, k) = data.outputs(perm[j], k);
  const CrossGain shuffled = fit_h(permuted, truth, 0.01);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i)
      CHECK(shuffled.h(j, i) == doctest::Approx(base.h(perm[j], i)).epsilon(1e-10));
}

TEST_CASE("estimator consistency: error shrinks with the noise floor") {
  const ScalarSurrogate truth = ScalarSurrogate::normalized(0.09, 1.87e4, 1.97e2);
  const Matrix h_star = paper_h_hat();
  double prev_err = -1.0;
  for (double noise : {1e-7, 1e-8, 0.0}) {
    const SignalLog data = surrogate_dataset(truth, h_star, 23, noise);
    const ScalarSurrogate fit = fit_siso(data, 2, 9, 0.01);
    const CrossGain gain = fit_h(data, fit, 0.01);
    const double err = frobenius_norm(gain.h - h_star) / frobenius_norm(h_star);
    if (prev_err >= 0.0) CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("validate_fit: perfect model, zero model, degenerate channel") {
  const ScalarSurrogate truth = ScalarSurrogate::normalized(0.09, 1.87e4, 1.97e2);
  const Matrix h_star = paper_h_hat();
  const SignalLog data = surrogate_dataset(truth, h_star, 29);
  CrossGain gain;
  gain.provenance = GainProvenance::identified;
  gain.h = h_star;

  const FitReport perfect = validate_fit(data, truth, gain);
  for (double v : perfect.rmse) CHECK(v <= 1e-18);
  for (double v : perfect.r_squared) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  CrossGain zero;
  zero.provenance = GainProvenance::identified;
  zero.h = Matrix(5, 5);
  const FitReport bad = validate_fit(data, truth, zero);
  for (double v : bad.r_squared) CHECK(v <= 0.0);

  SignalLog degenerate = data;
  for (std::size_t k = 0; k < degenerate.samples(); ++k) degenerate.outputs(3, k) = 0.0;
  const FitReport partial = validate_fit(degenerate, truth, zero);
  CHECK(std::isnan(partial.r_squared[3]));

  // R^2 invariant under a common rescaling of channel data and model row
  SignalLog rescaled = data;
  for (std::size_t k = 0; k < rescaled.samples(); ++k) rescaled.outputs(1, k) *= 3.0;
  CrossGain row_scaled = gain;
  for (int i = 0; i < 5; ++i) row_scaled.h(1, i) *= 3.0;
  const FitReport again = validate_fit(rescaled, truth, row_scaled);
  CHECK(again.r_squared[1] == doctest::Approx(perfect.r_squared[1]).epsilon(1e-12));
}

TEST_CASE("truth-plant pipeline: delay, poles, gain oracle, fit quality") {
  TruthPlantConfig cfg;
  cfg.geometry = default_geometry();
  const OperatingPoint op = paper_op();
  PrbsSpec spec;
  spec.base_seed = 42;

  const SignalLog q_abs = design_prbs(spec, op, 0.01);
  const ExperimentResult exp_res = run_experiment(cfg, op.q0, q_abs, 0.01);
  OperatingPoint measured = op;
  measured.h0 = exp_res.h0;
  const SignalLog dev = to_deviation(exp_res.log, measured);

  const DelayEstimate delay = estimate_delay(dev, 2, 30);
  CHECK(delay.delay_samples >= 8);
  CHECK(delay.delay_samples <= 10);

  const ScalarSurrogate fit = fit_siso(dev, 2, delay.delay_samples, 0.01);
  CHECK(fit.c0 == doctest::Approx(1.87e4).epsilon(0.05));
  CHECK(fit.c1 == doctest::Approx(1.97e2).epsilon(0.05));

  const CrossGain gain = fit_h(dev, fit, 0.01);
  const CrossGain oracle = dc_sensitivity(cfg, op.q0, 1e-8);
  CHECK(frobenius_norm(gain.h - oracle.h) <= 0.10 * frobenius_norm(oracle.h));

  const FitReport report = validate_fit(dev, fit, gain);
  for (double r2 : report.r_squared) CHECK(r2 >= 0.95);
}
