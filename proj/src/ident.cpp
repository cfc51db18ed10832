#include "ident.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace coatline {

void PrbsSpec::validate(double sample_time) const {
  if (!(amplitude_fraction >= 0.0) || amplitude_fraction >= 1.0)
    throw ValidationError("prbs: amplitude fraction must lie in [0, 1)");
  if (!(bit_duration >= sample_time))
    throw ValidationError("prbs: bit duration must be >= the sample time");
  if (!(total_duration >= 20.0 * bit_duration))
    throw ValidationError("prbs: total duration must cover at least 20 bits");
  const double ratio = bit_duration / sample_time;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9)
    throw ValidationError("prbs: bit duration must be an integer multiple of the sample time");
}

SignalLog design_prbs(const PrbsSpec &spec, const OperatingPoint &op, double sample_time) {
  spec.validate(sample_time);
  const std::size_t n = op.q0.size();
  op.validate(n);

  const std::size_t samples_per_bit =
      static_cast<std::size_t>(std::lround(spec.bit_duration / sample_time));
  const std::size_t big_n =
      static_cast<std::size_t>(std::lround(spec.total_duration / sample_time));
  const std::size_t n_bits = (big_n + samples_per_bit - 1) / samples_per_bit;

  SignalLog log;
  log.sample_time = sample_time;
  log.frame = Frame::absolute;
  log.inputs = Matrix(n, big_n);
  log.outputs = Matrix(n, big_n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<int> bits = prbs_bits(n_bits, spec.base_seed + i);
    for (std::size_t k = 0; k < big_n; ++k) {
      const int bit = bits[k / samples_per_bit];
      log.inputs(i, k) = op.q0[i] * (1.0 + spec.amplitude_fraction * bit);
    }
  }
  return log;
}

namespace {

struct SisoObjective {
  const std::vector<double> &u;
  const std::vector<double> &y;
  int delay;
  double sample_time;

  struct Eval {
    double sse = 0.0;
    double gain = 0.0;
  };

  Eval operator()(double c0, double c1) const {
    const ScalarSurrogate cand =
        ScalarSurrogate::normalized(delay * sample_time, c0, c1);
    const DiscreteFilter filter(cand, sample_time);
    const std::vector<double> r = filter.filter(u);
    double rr = 0.0, ry = 0.0, yy = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      rr += r[k] * r[k];
      ry += r[k] * y[k];
      yy += y[k] * y[k];
    }
    Eval out;
    out.gain = rr > 0.0 ? ry / rr : 0.0;
    out.sse = yy - out.gain * ry;  // = ||y - g r||^2 at the optimal g
    if (out.sse < 0.0) out.sse = 0.0;
    return out;
  }
};

struct SisoFitResult {
  double c0 = 0.0, c1 = 0.0, sse = 0.0, gain = 0.0;
};

SisoFitResult fit_siso_at_delay(const std::vector<double> &u, const std::vector<double> &y,
                                int d, double sample_time, const SisoFitOptions &opts) {
  const SisoObjective objective{u, y, d, sample_time};

  // Coarse log grid.
  double best_f = std::numeric_limits<double>::infinity();
  double best_l0 = 0.0, best_l1 = 0.0;
  for (int a = 0; a < opts.grid_points; ++a) {
    const double t0 = static_cast<double>(a) / (opts.grid_points - 1);
    const double c0 = opts.c0_lo * std::pow(opts.c0_hi / opts.c0_lo, t0);
    for (int b = 0; b < opts.grid_points; ++b) {
      const double t1 = static_cast<double>(b) / (opts.grid_points - 1);
      const double c1 = opts.c1_lo * std::pow(opts.c1_hi / opts.c1_lo, t1);
      const double f = objective(c0, c1).sse;
      if (f < best_f) {
        best_f = f;
        best_l0 = std::log(c0);
        best_l1 = std::log(c1);
      }
    }
  }

  // Nelder-Mead in log coordinates from the best grid cell.
  auto eval_log = [&](double l0, double l1) { return objective(std::exp(l0), std::exp(l1)).sse; };
  struct Vertex {
    double l0, l1, f;
  };
  const double h0 = 0.5 * std::log(opts.c0_hi / opts.c0_lo) / (opts.grid_points - 1);
  const double h1 = 0.5 * std::log(opts.c1_hi / opts.c1_lo) / (opts.grid_points - 1);
  std::array<Vertex, 3> simplex{
      Vertex{best_l0, best_l1, best_f},
      Vertex{best_l0 + h0, best_l1, eval_log(best_l0 + h0, best_l1)},
      Vertex{best_l0, best_l1 + h1, eval_log(best_l0, best_l1 + h1)}};

  auto order = [&]() {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex &a, const Vertex &b) { return a.f < b.f; });
  };
  order();
  bool converged = false;
  for (int it = 0; it < opts.max_refine_iters; ++it) {
    const double spread = std::max(
        std::max(std::abs(simplex[1].l0 - simplex[0].l0), std::abs(simplex[2].l0 - simplex[0].l0)),
        std::max(std::abs(simplex[1].l1 - simplex[0].l1), std::abs(simplex[2].l1 - simplex[0].l1)));
    if (spread < opts.refine_tol) {
      converged = true;
      break;
    }
    const double cl0 = 0.5 * (simplex[0].l0 + simplex[1].l0);
    const double cl1 = 0.5 * (simplex[0].l1 + simplex[1].l1);
    const Vertex &worst = simplex[2];
    const double rl0 = cl0 + (cl0 - worst.l0);
    const double rl1 = cl1 + (cl1 - worst.l1);
    const double fr = eval_log(rl0, rl1);
    if (fr < simplex[0].f) {
      const double el0 = cl0 + 2.0 * (cl0 - worst.l0);
      const double el1 = cl1 + 2.0 * (cl1 - worst.l1);
      const double fe = eval_log(el0, el1);
      simplex[2] = fe < fr ? Vertex{el0, el1, fe} : Vertex{rl0, rl1, fr};
    } else if (fr < simplex[1].f) {
      simplex[2] = Vertex{rl0, rl1, fr};
    } else {
      const double kl0 = cl0 + 0.5 * (worst.l0 - cl0);
      const double kl1 = cl1 + 0.5 * (worst.l1 - cl1);
      const double fk = eval_log(kl0, kl1);
      if (fk < worst.f) {
        simplex[2] = Vertex{kl0, kl1, fk};
      } else {
        for (int v = 1; v < 3; ++v) {
          simplex[v].l0 = 0.5 * (simplex[v].l0 + simplex[0].l0);
          simplex[v].l1 = 0.5 * (simplex[v].l1 + simplex[0].l1);
          simplex[v].f = eval_log(simplex[v].l0, simplex[v].l1);
        }
      }
    }
    order();
  }
  if (!converged) throw NumericError("fit_siso: coefficient search did not converge");

  SisoFitResult out;
  out.c0 = std::exp(simplex[0].l0);
  out.c1 = std::exp(simplex[0].l1);
  const SisoObjective::Eval ev = objective(out.c0, out.c1);
  out.sse = ev.sse;
  out.gain = ev.gain;
  return out;
}

std::vector<double> channel_row(const Matrix &m, std::size_t row) {
  std::vector<double> v(m.cols());
  for (std::size_t k = 0; k < m.cols(); ++k) v[k] = m(row, k);
  return v;
}

void require_excitation(const std::vector<double> &u) {
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  double var = 0.0;
  for (double v : u) var += (v - mean) * (v - mean);
  if (!(var > 0.0)) throw ValidationError("identification: flat input channel (no excitation)");
}

} // namespace

DelayEstimate estimate_delay(const SignalLog &dev_log, std::size_t channel, int d_max,
                             const SisoFitOptions &opts) {
  dev_log.validate();
  if (dev_log.frame != Frame::deviation)
    throw ValidationError("estimate_delay: log must be in the deviation frame");
  if (channel >= dev_log.channels()) throw ValidationError("estimate_delay: channel out of range");
  if (d_max < 0 || static_cast<std::size_t>(d_max) > dev_log.samples() / 4)
    throw ValidationError("estimate_delay: d_max must lie in [0, N/4]");

  const std::vector<double> u = channel_row(dev_log.inputs, channel);
  const std::vector<double> y = channel_row(dev_log.outputs, channel);
  require_excitation(u);

  DelayEstimate best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int d = 0; d <= d_max; ++d) {
    const SisoFitResult fit = fit_siso_at_delay(u, y, d, dev_log.sample_time, opts);
    if (fit.sse < best_sse) {
      best_sse = fit.sse;
      best.delay_samples = d;
      best.dead_time = d * dev_log.sample_time;
    }
  }
  return best;
}

ScalarSurrogate fit_siso(const SignalLog &dev_log, std::size_t channel, int d,
                         double sample_time, const SisoFitOptions &opts) {
  dev_log.validate();
  if (dev_log.frame != Frame::deviation)
    throw ValidationError("fit_siso: log must be in the deviation frame");
  if (channel >= dev_log.channels()) throw ValidationError("fit_siso: channel out of range");
  if (d < 0) throw ValidationError("fit_siso: delay must be >= 0");

  const std::vector<double> u = channel_row(dev_log.inputs, channel);
  const std::vector<double> y = channel_row(dev_log.outputs, channel);
  require_excitation(u);

  const SisoFitResult fit = fit_siso_at_delay(u, y, d, sample_time, opts);
  if (!(fit.c0 > 0.0) || !(fit.c1 > 0.0))
    throw NumericError("fit_siso: non-positive coefficient estimate");
  return ScalarSurrogate::normalized(d * sample_time, fit.c0, fit.c1);
}

CrossGain fit_h(const SignalLog &dev_log, const ScalarSurrogate &s, double sample_time) {
  dev_log.validate();
  if (dev_log.frame != Frame::deviation)
    throw ValidationError("fit_h: log must be in the deviation frame");
  const std::size_t n = dev_log.channels();
  const std::size_t big_n = dev_log.samples();

  const DiscreteFilter proto(s, sample_time);
  Matrix regressors(big_n, n);  // column i = (G * dq_i)
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> r = proto.filter(channel_row(dev_log.inputs, i));
    for (std::size_t k = 0; k < big_n; ++k) regressors(k, i) = r[k];
  }

  CrossGain gain;
  gain.provenance = GainProvenance::identified;
  gain.h = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<double> row = lstsq(regressors, channel_row(dev_log.outputs, j));
    for (std::size_t i = 0; i < n; ++i) gain.h(j, i) = row[i];
  }
  return gain;
}

FitReport validate_fit(const SignalLog &dev_log, const ScalarSurrogate &s, const CrossGain &gain) {
  dev_log.validate();
  if (dev_log.frame != Frame::deviation)
    throw ValidationError("validate_fit: log must be in the deviation frame");
  const std::size_t n = dev_log.channels();
  if (gain.h.rows() != n)
    throw ValidationError("validate_fit: gain dimension differs from channel count");

  SignalLog input_only = dev_log;
  input_only.outputs = Matrix(n, dev_log.samples());
  const SignalLog predicted = simulate_mimo(s, gain, input_only);

  const std::size_t big_n = dev_log.samples();
  FitReport report;
  report.rmse.resize(n);
  report.r_squared.resize(n);
  report.residuals = Matrix(n, big_n);
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t k = 0; k < big_n; ++k) mean += dev_log.outputs(j, k);
    mean /= static_cast<double>(big_n);
    double sse = 0.0, sst = 0.0;
    for (std::size_t k = 0; k < big_n; ++k) {
      const double resid = dev_log.outputs(j, k) - predicted.outputs(j, k);
      report.residuals(j, k) = resid;
      sse += resid * resid;
      sst += (dev_log.outputs(j, k) - mean) * (dev_log.outputs(j, k) - mean);
    }
    report.rmse[j] = std::sqrt(sse / static_cast<double>(big_n));
    report.r_squared[j] =
        sst > 0.0 ? 1.0 - sse / sst : std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

} // namespace coatline
