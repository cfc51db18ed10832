#include "kernelmap.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coatline {

void KernelParams::validate() const {
  if (!(kappa > 0.0)) throw ValidationError("kernel params: kappa must be positive");
  if (!(ell > 0.0)) throw ValidationError("kernel params: ell must be positive");
}

void CrossGain::validate() const {
  if (h.rows() != h.cols()) throw ValidationError("cross gain: matrix must be square");
  if (!h.all_finite()) throw ValidationError("cross gain: non-finite entries");
  if (provenance == GainProvenance::kernel) {
    for (double v : h.data())
      if (v < 0.0) throw ValidationError("cross gain: kernel provenance requires nonnegative entries");
  }
}

double kernel_entry(std::size_t j, std::size_t i, const KernelParams &p, const Geometry &g) {
  p.validate();
  if (i >= g.n_inlets || j >= g.n_inlets) throw ValidationError("kernel_entry: index out of range");
  const double yj = g.stripe_centers[j];
  const double yi = g.stripe_centers[i];
  const double half = 0.5 * g.stripe_width;
  const double s = std::sqrt(2.0) * p.ell;
  const double hi = erf((yi + half - yj) / s);
  const double lo = erf((yi - half - yj) / s);
  return p.kappa * std::sqrt(3.14159265358979323846 / 2.0) * p.ell / g.stripe_width * (hi - lo);
}

CrossGain build_h_pde(const KernelParams &p, const Geometry &g) {
  g.validate();
  p.validate();
  const std::size_t n = g.n_inlets;
  CrossGain gain;
  gain.provenance = GainProvenance::kernel;
  gain.h = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) gain.h(j, i) = kernel_entry(j, i, p, g);
  return gain;
}

double kappa_star(const CrossGain &h_hat, double ell, const Geometry &g) {
  h_hat.validate();
  if (h_hat.h.rows() != g.n_inlets)
    throw ValidationError("kappa_star: gain dimension differs from geometry");
  const CrossGain h0 = build_h_pde(KernelParams{1.0, ell}, g);
  const double denom = frobenius_inner(h0.h, h0.h);
  if (!(denom > 0.0)) throw NumericError("kappa_star: degenerate unit kernel matrix");
  return frobenius_inner(h_hat.h, h0.h) / denom;
}

CalibrationResult calibrate(const CrossGain &h_hat, const Geometry &g, double ell_lo,
                            double ell_hi, double tol) {
  h_hat.validate();
  if (!(ell_lo > 0.0) || !(ell_hi > ell_lo))
    throw ValidationError("calibrate: ell range must be positive and ordered");
  const double h_norm = frobenius_norm(h_hat.h);
  if (!(h_norm > 0.0)) throw ValidationError("calibrate: zero gain matrix");

  auto mismatch = [&](double ell) {
    const double ks = kappa_star(h_hat, ell, g);
    const CrossGain h0 = build_h_pde(KernelParams{1.0, ell}, g);
    return frobenius_norm(h_hat.h - ks * h0.h);
  };

  CalibrationResult out;
  out.ell_star = minimize_1d(mismatch, ell_lo, ell_hi, tol);
  out.kappa_star = kappa_star(h_hat, out.ell_star, g);
  out.rel_error = mismatch(out.ell_star) / h_norm;
  return out;
}

void write_cross_gain_csv(const CrossGain &gain, const std::string &path) {
  gain.validate();
  std::string text;
  char buf[32];
  for (std::size_t j = 0; j < gain.h.rows(); ++j) {
    for (std::size_t i = 0; i < gain.h.cols(); ++i) {
      if (i) text += ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), gain.h(j, i));
      text.append(buf, res.ptr);
    }
    text += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
}

CrossGain read_cross_gain_csv(const std::string &path, GainProvenance provenance) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        std::ostringstream msg;
        msg << "cross gain CSV: malformed number '" << field << "' on line " << line_no;
        throw IoError(msg.str());
      }
      vals.push_back(v);
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw IoError("cross gain CSV: empty file: " + path);
  const std::size_t n = rows.size();
  CrossGain gain;
  gain.provenance = provenance;
  gain.h = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    if (rows[j].size() != n) {
      std::ostringstream msg;
      msg << "cross gain CSV: row " << (j + 1) << " has " << rows[j].size()
          << " entries, expected " << n;
      throw IoError(msg.str());
    }
    for (std::size_t i = 0; i < n; ++i) gain.h(j, i) = rows[j][i];
  }
  gain.validate();
  return gain;
}

} // namespace coatline
