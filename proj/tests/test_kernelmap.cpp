#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "kernelmap.hpp"

using namespace coatline;

namespace {

// Published identified gain matrix (diag ~ 50 m/(m^3/s)).
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

} // namespace

TEST_CASE("kernel_entry: calibrated anchor values and symmetry") {
  const Geometry g = default_geometry();
  const KernelParams p{60.6, 0.0140};
  CHECK(kernel_entry(0, 0, p, g) == doctest::Approx(50.7).epsilon(0.5 / 50.7));
  CHECK(kernel_entry(0, 1, p, g) == doctest::Approx(9.94).epsilon(0.2 / 9.94));
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i)
      CHECK(kernel_entry(j, i, p, g) == doctest::Approx(kernel_entry(i, j, p, g)).epsilon(1e-12));
  // bounded by the full-kernel integral
  const double bound = p.kappa * std::sqrt(2.0 * 3.14159265358979) * p.ell / g.stripe_width;
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) {
      CHECK(kernel_entry(j, i, p, g) > 0.0);
      CHECK(kernel_entry(j, i, p, g) < bound);
    }
}

TEST_CASE("build_h_pde: structure and scaling") {
  const Geometry g = default_geometry();
  const CrossGain h = build_h_pde(KernelParams{60.6, 0.0140}, g);
  CHECK(h.provenance == GainProvenance::kernel);
  // symmetric, positive, decaying away from the diagonal
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) {
      CHECK(h.h(j, i) == doctest::Approx(h.h(i, j)).epsilon(1e-12));
      CHECK(h.h(j, i) > 0.0);
    }
  for (int j = 0; j < 5; ++j)
    for (int i = 1; i < 5; ++i)
      if (std::abs(j - i) > std::abs(j - (i - 1)))
        CHECK(h.h(j, i) < h.h(j, i - 1));

  // short-range limit: off-diagonals vanish
  const CrossGain tight = build_h_pde(KernelParams{60.6, 1e-5}, g);
  CHECK(tight.h(0, 1) < 1e-12 * tight.h(0, 0));

  // linear in kappa
  const CrossGain twice = build_h_pde(KernelParams{121.2, 0.0140}, g);
  for (int k = 0; k < 25; ++k)
    CHECK(twice.h.data()[k] == doctest::Approx(2.0 * h.h.data()[k]).epsilon(1e-12));

  // edge rows lose kernel mass relative to the centre row
  double edge = 0.0, centre = 0.0;
  for (int i = 0; i < 5; ++i) {
    edge += h.h(0, i);
    centre += h.h(2, i);
  }
  CHECK(edge < centre);
}

TEST_CASE("kappa_star: projection identities") {
  const Geometry g = default_geometry();
  const CrossGain h0 = build_h_pde(KernelParams{1.0, 0.0140}, g);

  CrossGain twice;
  twice.provenance = GainProvenance::identified;
  twice.h = 2.0 * h0.h;
  CHECK(kappa_star(twice, 0.0140, g) == doctest::Approx(2.0).epsilon(1e-12));

  CrossGain h60;
  h60.provenance = GainProvenance::identified;
  h60.h = build_h_pde(KernelParams{60.0, 0.0140}, g).h;
  CHECK(kappa_star(h60, 0.0140, g) == doctest::Approx(60.0).epsilon(1e-11));

  CrossGain paper;
  paper.provenance = GainProvenance::identified;
  paper.h = paper_h_hat();
  CHECK(kappa_star(paper, 0.0140, g) == doctest::Approx(60.6).epsilon(0.01));
}

TEST_CASE("kappa_star: invariant under Frobenius-orthogonal perturbations") {
  const Geometry g = default_geometry();
  const CrossGain h0 = build_h_pde(KernelParams{1.0, 0.0140}, g);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> dist;
  CrossGain base;
  base.provenance = GainProvenance::identified;
  base.h = paper_h_hat();
  const double k0 = kappa_star(base, 0.0140, g);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix e(5, 5);
    for (double &v : e.data()) v = dist(rng);
    // project out the H0 component
    const double coef = frobenius_inner(e, h0.h) / frobenius_inner(h0.h, h0.h);
    e = e - coef * h0.h;
    CrossGain perturbed;
    perturbed.provenance = GainProvenance::identified;
    perturbed.h = base.h + e;
    CHECK(kappa_star(perturbed, 0.0140, g) == doctest::Approx(k0).epsilon(1e-9));
  }
}

TEST_CASE("calibrate: exact-fit round trip") {
  const Geometry g = default_geometry();
  CrossGain target;
  target.provenance = GainProvenance::identified;
  target.h = build_h_pde(KernelParams{60.0, 0.0140}, g).h;
  const CalibrationResult cal = calibrate(target, g, 1e-4, 1e-1, 1e-7);
  CHECK(cal.kappa_star == doctest::Approx(60.0).epsilon(1e-5));
  CHECK(cal.ell_star == doctest::Approx(0.0140).epsilon(1e-4));
  CHECK(cal.rel_error <= 1e-6);
}

TEST_CASE("calibrate: paper gain matrix lands at the published optimum") {
  const Geometry g = default_geometry();
  CrossGain paper;
  paper.provenance = GainProvenance::identified;
  paper.h = paper_h_hat();
  const CalibrationResult cal = calibrate(paper, g, 1e-4, 1e-1, 1e-7);
  CHECK(cal.ell_star == doctest::Approx(0.0140).epsilon(0.005));
  CHECK(cal.kappa_star == doctest::Approx(60.6).epsilon(0.005));
  CHECK(cal.rel_error == doctest::Approx(0.33).epsilon(0.03 / 0.33));
}

TEST_CASE("calibrate: scale equivariance and degenerate input") {
  const Geometry g = default_geometry();
  CrossGain paper;
  paper.provenance = GainProvenance::identified;
  paper.h = paper_h_hat();
  const CalibrationResult base = calibrate(paper, g, 1e-4, 1e-1, 1e-7);
  CrossGain scaled;
  scaled.provenance = GainProvenance::identified;
  scaled.h = 3.0 * paper.h;
  const CalibrationResult cal = calibrate(scaled, g, 1e-4, 1e-1, 1e-7);
  CHECK(cal.rel_error == doctest::Approx(base.rel_error).epsilon(1e-9));
  CHECK(cal.kappa_star == doctest::Approx(3.0 * base.kappa_star).epsilon(1e-6));

  CrossGain zero;
  zero.provenance = GainProvenance::identified;
  zero.h = Matrix(5, 5);
  CHECK_THROWS_AS(calibrate(zero, g, 1e-4, 1e-1, 1e-7), ValidationError);
}

TEST_CASE("cross gain CSV round trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "coatline_kernel_test";
  fs::create_directories(dir);
  CrossGain paper;
  paper.provenance = GainProvenance::identified;
  paper.h = paper_h_hat();
  write_cross_gain_csv(paper, (dir / "h.csv").string());
  const CrossGain back = read_cross_gain_csv((dir / "h.csv").string(), GainProvenance::identified);
  CHECK(back.h.data() == paper.h.data());
  fs::remove_all(dir);
}
