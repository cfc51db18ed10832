#include "dynamics.hpp"

#include <cmath>

namespace coatline {

ScalarSurrogate ScalarSurrogate::normalized(double dead_time, double c0, double c1) {
  ScalarSurrogate s;
  s.dead_time = dead_time;
  s.c0 = c0;
  s.c1 = c1;
  s.b0 = c0;
  s.b1 = 0.0;
  s.validate();
  return s;
}

void ScalarSurrogate::validate() const {
  if (dead_time < 0.0) throw ValidationError("surrogate: dead time must be >= 0");
  if (!(c0 > 0.0) || !(c1 > 0.0))
    throw ValidationError("surrogate: c0 and c1 must be positive (stable relaxation)");
  if (!std::isfinite(b0) || !std::isfinite(b1))
    throw ValidationError("surrogate: non-finite numerator");
}

ScalarSurrogate surrogate_from_geometry(const Geometry &g, double c0, double c1) {
  g.validate();
  return ScalarSurrogate::normalized(g.transport_delay(), c0, c1);
}

namespace {

// exp(A Ts) for the companion matrix A = [[0,1],[-c0,-c1]] written as
// alpha*I + beta*A; the three damping regimes have distinct closed forms.
void companion_exp(double c0, double c1, double t, double &alpha, double &beta) {
  const double sigma = 0.5 * c1;
  const double disc = sigma * sigma - c0;
  const double scale = std::max(c0, sigma * sigma);
  if (std::abs(disc) <= 1e-9 * scale) {
    const double e = std::exp(-sigma * t);
    beta = t * e;
    alpha = e * (1.0 + sigma * t);
  } else if (disc > 0.0) {
    const double mu = std::sqrt(disc);
    const double r1 = -sigma + mu;
    const double r2 = -sigma - mu;
    const double e1 = std::exp(r1 * t);
    const double e2 = std::exp(r2 * t);
    beta = (e1 - e2) / (2.0 * mu);
    alpha = e1 - r1 * beta;
  } else {
    const double omega = std::sqrt(-disc);
    const double e = std::exp(-sigma * t);
    beta = e * std::sin(omega * t) / omega;
    alpha = e * (std::cos(omega * t) + sigma * std::sin(omega * t) / omega);
  }
}

} // namespace

DiscreteFilter::DiscreteFilter(const ScalarSurrogate &s, double sample_time) {
  s.validate();
  if (!(sample_time > 0.0)) throw ValidationError("discretize: sample time must be positive");
  ts_ = sample_time;

  const double ratio = s.dead_time / sample_time;
  delay_ = static_cast<int>(std::lround(ratio));
  delay_rounded_ = std::abs(ratio - delay_) > 1e-9;

  double alpha = 0.0, beta = 0.0;
  companion_exp(s.c0, s.c1, sample_time, alpha, beta);
  // Ad = alpha I + beta A;  Bd = A^{-1}(Ad - I)B = [(1 - alpha)/c0, beta]^T.
  ad_ = {alpha, beta, -s.c0 * beta, alpha - s.c1 * beta};
  bd_ = {(1.0 - alpha) / s.c0, beta};
  c_ = {s.b0, s.b1};

  fifo_.assign(static_cast<std::size_t>(delay_) + 1, 0.0);
  reset();
}

void DiscreteFilter::reset() {
  state_ = {0.0, 0.0};
  std::fill(fifo_.begin(), fifo_.end(), 0.0);
  fifo_pos_ = 0;
}

double DiscreteFilter::dc_gain() const {
  // C (I - Ad)^{-1} Bd
  const double a = 1.0 - ad_[0], b = -ad_[1], c = -ad_[2], d = 1.0 - ad_[3];
  const double det = a * d - b * c;
  const double x0 = (d * bd_[0] - b * bd_[1]) / det;
  const double x1 = (-c * bd_[0] + a * bd_[1]) / det;
  return c_[0] * x0 + c_[1] * x1;
}

double DiscreteFilter::step(double u) {
  const double y = output();
  // FIFO realizes the integer-sample dead time: state update consumes the
  // input from delay_ samples ago.
  fifo_[fifo_pos_] = u;
  fifo_pos_ = (fifo_pos_ + 1) % fifo_.size();
  const double ud = fifo_[fifo_pos_];
  const double x0 = state_[0], x1 = state_[1];
  state_[0] = ad_[0] * x0 + ad_[1] * x1 + bd_[0] * ud;
  state_[1] = ad_[2] * x0 + ad_[3] * x1 + bd_[1] * ud;
  return y;
}

std::vector<double> DiscreteFilter::filter(const std::vector<double> &u) const {
  DiscreteFilter tmp = *this;
  tmp.reset();
  std::vector<double> y(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) y[k] = tmp.step(u[k]);
  return y;
}

SignalLog simulate_mimo(const ScalarSurrogate &s, const CrossGain &gain, const SignalLog &dq) {
  dq.validate();
  gain.validate();
  if (dq.frame != Frame::deviation)
    throw ValidationError("simulate_mimo: input log must be in the deviation frame");
  const std::size_t n = dq.channels();
  if (gain.h.rows() != n)
    throw ValidationError("simulate_mimo: gain dimension differs from channel count");

  const DiscreteFilter proto(s, dq.sample_time);
  const std::size_t big_n = dq.samples();

  Matrix filtered(n, big_n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> u(big_n);
    for (std::size_t k = 0; k < big_n; ++k) u[k] = dq.inputs(i, k);
    const std::vector<double> r = proto.filter(u);
    for (std::size_t k = 0; k < big_n; ++k) filtered(i, k) = r[k];
  }

  SignalLog out;
  out.sample_time = dq.sample_time;
  out.frame = Frame::deviation;
  out.inputs = dq.inputs;
  out.outputs = gain.h * filtered;
  return out;
}

} // namespace coatline
