#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "errors.hpp"

namespace coatline {

/// Dense row-major matrix of doubles. All matrices in this project are tiny
/// (n x n with n <= 16, or tall regressor stacks N x n), so everything is
/// plain loops; no blocking, no views.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double> &data() const { return data_; }
  std::vector<double> &data() { return data_; }

  bool all_finite() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix &a, const Matrix &b);
Matrix operator+(const Matrix &a, const Matrix &b);
Matrix operator-(const Matrix &a, const Matrix &b);
Matrix operator*(double s, const Matrix &a);
Matrix transpose(const Matrix &a);
std::vector<double> operator*(const Matrix &a, const std::vector<double> &x);

double frobenius_norm(const Matrix &a);
double frobenius_inner(const Matrix &a, const Matrix &b);

struct SvdResult {
  Matrix u;               // n x n, orthogonal
  std::vector<double> s;  // singular values, descending, >= 0
  Matrix v;               // n x n, orthogonal
};

/// Gauss error function, |error| <= 1e-7 over the real line (series for
/// small arguments, Lentz continued fraction for the complementary tail).
/// Odd symmetry holds exactly by construction.
double erf(double x);

/// Least squares min ||Ax - b||_2 via Householder QR. Requires N >= p and a
/// condition estimate below 1e12; ill-conditioned systems raise NumericError
/// carrying the estimate instead of silently returning a minimal-norm answer.
std::vector<double> lstsq(const Matrix &a, const std::vector<double> &b);

/// SVD of a square matrix (n <= 16) by cyclic one-sided Jacobi.
SvdResult svd(const Matrix &m);

/// Inverse via SVD; condition estimate >= 1e12 raises NumericError.
Matrix inverse(const Matrix &m);

/// Condition estimate sigma_max/sigma_min from the Jacobi SVD.
double condition_estimate(const Matrix &m);

/// 1-D minimization: coarse bracketing grid of 33 points (log-spaced when
/// lo > 0, linear otherwise) followed by golden-section refinement to tol.
/// The result is always inside [lo, hi].
double minimize_1d(const std::function<double(double)> &f, double lo, double hi, double tol);

/// Maximal-length PRBS from a degree-10 LFSR (x^10 + x^3 + 1), mapped to
/// {-1, +1}. Deterministic for a given seed; distinct seeds start the
/// m-sequence at distinct phases.
std::vector<int> prbs_bits(std::size_t n_bits, std::uint64_t seed);

/// Seeded Gaussian sampler (Box-Muller over mt19937_64) so that logs are
/// bit-reproducible for a fixed seed.
class NormalSampler {
public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
  double next();

private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace coatline
