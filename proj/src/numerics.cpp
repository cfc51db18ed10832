#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace coatline {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator*(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows()) throw ValidationError("matrix product: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator+(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("matrix sum: dimensions differ");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Matrix operator-(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("matrix difference: dimensions differ");
  Matrix c = a;
  for (std::size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Matrix operator*(double s, const Matrix &a) {
  Matrix c = a;
  for (double &v : c.data()) v *= s;
  return c;
}

Matrix transpose(const Matrix &a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> operator*(const Matrix &a, const std::vector<double> &x) {
  if (a.cols() != x.size()) throw ValidationError("matrix-vector product: dimensions differ");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

double frobenius_norm(const Matrix &a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

double frobenius_inner(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("frobenius inner product: dimensions differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) acc += a.data()[i] * b.data()[i];
  return acc;
}

namespace {

constexpr double kTwoOverSqrtPi = 1.1283791670955126;
constexpr double kSqrtPi = 1.7724538509055160;

double erf_series(double ax) {
  // erf(x) = 2/sqrt(pi) * sum_n (-1)^n x^(2n+1) / (n! (2n+1))
  const double x2 = ax * ax;
  double term = ax;  // x^(2n+1) / n! without the (2n+1) divisor
  double sum = ax;
  for (int n = 1; n < 80; ++n) {
    term *= -x2 / n;
    const double contrib = term / (2.0 * n + 1.0);
    sum += contrib;
    if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
  }
  return kTwoOverSqrtPi * sum;
}

double erfc_continued_fraction(double ax) {
  // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
  // evaluated by the modified Lentz algorithm; solid for x >= 2.
  const double tiny = 1e-300;
  double f = ax;
  double c = ax;
  double d = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double a_k = 0.5 * k;
    d = ax + a_k * d;
    if (std::abs(d) < tiny) d = tiny;
    c = ax + a_k / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-ax * ax) / (kSqrtPi * f);
}

} // namespace

double erf(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  double r;
  if (ax < 2.0) {
    r = erf_series(ax);
  } else if (ax < 6.5) {
    r = 1.0 - erfc_continued_fraction(ax);
  } else {
    r = 1.0;
  }
  return x < 0.0 ? -r : r;
}

std::vector<double> lstsq(const Matrix &a, const std::vector<double> &b) {
  const std::size_t n = a.rows();
  const std::size_t p = a.cols();
  if (b.size() != n) throw ValidationError("lstsq: rhs length differs from row count");
  if (n < p) throw ValidationError("lstsq: fewer rows than unknowns");

  Matrix r = a;
  std::vector<double> qtb = b;

  // Householder QR, reflecting b alongside.
  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += r(i, k) * r(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0)
      throw NumericError("lstsq: rank-deficient regressor matrix (zero column)",
                         std::numeric_limits<double>::infinity());
    const double alpha = r(k, k) >= 0.0 ? -norm : norm;
    std::vector<double> v(n - k, 0.0);
    v[0] = r(k, k) - alpha;
    for (std::size_t i = k + 1; i < n; ++i) v[i - k] = r(i, k);
    double vtv = 0.0;
    for (double vi : v) vtv += vi * vi;
    if (vtv == 0.0) continue;
    for (std::size_t j = k; j < p; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i - k] * r(i, j);
      const double f = 2.0 * dot / vtv;
      for (std::size_t i = k; i < n; ++i) r(i, j) -= f * v[i - k];
    }
    double dotb = 0.0;
    for (std::size_t i = k; i < n; ++i) dotb += v[i - k] * qtb[i];
    const double fb = 2.0 * dotb / vtv;
    for (std::size_t i = k; i < n; ++i) qtb[i] -= fb * v[i - k];
  }

  // Condition estimate from the p x p triangular factor.
  Matrix rr(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) rr(i, j) = r(i, j);
  const double cond = condition_estimate(rr);
  if (!(cond < 1e12)) {
    std::ostringstream msg;
    msg << "lstsq: ill-conditioned regressor matrix, condition estimate " << cond;
    throw NumericError(msg.str(), cond);
  }

  std::vector<double> x(p, 0.0);
  for (std::size_t i = p; i-- > 0;) {
    double acc = qtb[i];
    for (std::size_t j = i + 1; j < p; ++j) acc -= rr(i, j) * x[j];
    x[i] = acc / rr(i, i);
  }
  return x;
}

SvdResult svd(const Matrix &m) {
  if (m.rows() != m.cols()) throw ValidationError("svd: matrix must be square");
  const std::size_t n = m.rows();
  if (n > 16) throw ValidationError("svd: n > 16 unsupported");
  if (!m.all_finite()) throw ValidationError("svd: non-finite entries");

  Matrix a = m;
  Matrix v = Matrix::identity(n);

  // One-sided Jacobi: orthogonalize column pairs of A, accumulating V.
  const double eps = 1e-15;
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> s(n, 0.0);
  Matrix u(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += a(i, j) * a(i, j);
    s[j] = std::sqrt(norm);
  }

  // Sort singular values descending, permuting the accumulated columns.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return s[i] > s[j]; });

  SvdResult out;
  out.s.resize(n);
  out.u = Matrix(n, n);
  out.v = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.s[j] = s[src];
    for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    if (s[src] > 0.0) {
      for (std::size_t i = 0; i < n; ++i) out.u(i, j) = a(i, src) / s[src];
    }
  }

  // Complete U with an orthonormal basis for any zero singular values.
  for (std::size_t j = 0; j < n; ++j) {
    if (out.s[j] > 0.0) continue;
    for (std::size_t seed = 0; seed < n; ++seed) {
      std::vector<double> cand(n, 0.0);
      cand[seed] = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == j || (out.s[k] == 0.0 && k > j)) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += cand[i] * out.u(i, k);
        for (std::size_t i = 0; i < n; ++i) cand[i] -= dot * out.u(i, k);
      }
      double norm = 0.0;
      for (double ci : cand) norm += ci * ci;
      norm = std::sqrt(norm);
      if (norm > 1e-8) {
        for (std::size_t i = 0; i < n; ++i) out.u(i, j) = cand[i] / norm;
        break;
      }
    }
  }
  return out;
}

double condition_estimate(const Matrix &m) {
  const SvdResult d = svd(m);
  const double smax = d.s.front();
  const double smin = d.s.back();
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

Matrix inverse(const Matrix &m) {
  if (m.rows() != m.cols()) throw ValidationError("inverse: matrix must be square");
  const SvdResult d = svd(m);
  const double smax = d.s.front();
  const double smin = d.s.back();
  const double cond = smin == 0.0 ? std::numeric_limits<double>::infinity() : smax / smin;
  if (!(cond < 1e12)) {
    std::ostringstream msg;
    msg << "inverse: singular or ill-conditioned matrix, condition estimate " << cond;
    throw NumericError(msg.str(), cond);
  }
  const std::size_t n = m.rows();
  Matrix vsinv = d.v;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) vsinv(i, j) /= d.s[j];
  return vsinv * transpose(d.u);
}

double minimize_1d(const std::function<double(double)> &f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw ValidationError("minimize_1d: lo must be below hi");
  if (!(tol > 0.0)) throw ValidationError("minimize_1d: tol must be positive");

  auto eval = [&](double x) {
    const double y = f(x);
    if (!std::isfinite(y)) {
      std::ostringstream msg;
      msg << "minimize_1d: non-finite objective value at x = " << x;
      throw NumericError(msg.str());
    }
    return y;
  };

  // Coarse bracketing grid, then golden section inside the best bracket.
  constexpr int kGrid = 33;
  std::vector<double> xs(kGrid);
  const bool log_spaced = lo > 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double t = static_cast<double>(i) / (kGrid - 1);
    xs[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + t * (hi - lo);
  }
  int best = 0;
  double fbest = eval(xs[0]);
  for (int i = 1; i < kGrid; ++i) {
    const double fi = eval(xs[i]);
    if (fi < fbest) {
      fbest = fi;
      best = i;
    }
  }
  double a = xs[std::max(best - 1, 0)];
  double b = xs[std::min(best + 1, kGrid - 1)];

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d);
    }
  }
  return std::clamp(0.5 * (a + b), lo, hi);
}

std::vector<int> prbs_bits(std::size_t n_bits, std::uint64_t seed) {
  if (n_bits < 1) throw ValidationError("prbs_bits: n_bits must be >= 1");

  // splitmix64 scramble so that nearby seeds start at unrelated phases.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z = z ^ (z >> 31);

  std::uint32_t state = static_cast<std::uint32_t>(z % 1023u) + 1u;  // nonzero 10-bit state

  std::vector<int> bits(n_bits);
  for (std::size_t k = 0; k < n_bits; ++k) {
    // x^10 + x^3 + 1 (primitive), Fibonacci form, period 1023.
    const std::uint32_t fb = ((state >> 0) ^ (state >> 3)) & 1u;
    state = (state >> 1) | (fb << 9);
    bits[k] = (state & 1u) ? 1 : -1;
  }
  return bits;
}

double NormalSampler::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  do {
    u1 = unit(rng_);
  } while (u1 <= 0.0);
  const double u2 = unit(rng_);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

} // namespace coatline
