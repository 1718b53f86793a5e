#include <cmath>
#include <random>

#include "doctest.h"
#include "qfilm/config.hpp"
#include "qfilm/errors.hpp"
#include "qfilm/spectral_hom.hpp"

using namespace qfilm;

namespace {

FilmStack default_stack() {
  SpectrumConfig cfg;
  cfg.materials_file = default_materials_path();
  return make_film_stack(cfg);
}

SpectralAmplitude gaussian_spectrum(double fwhm_thz, double half_width = 400.0, int points = 8001) {
  const auto grid = symmetric_grid({half_width, points});
  std::vector<double> intensity;
  for (double w : grid) intensity.push_back(std::exp(-4.0 * std::log(2.0) * w * w / (fwhm_thz * fwhm_thz)));
  return spectrum_from_intensity(grid, intensity);
}

// Delay of one plate from Snell's law: internal path n d / cos(beta) minus the
// projection of the refracted displacement onto the incoming direction.
double snell_delay_fs(double d_mm, double n_h, double n_v, double tilt_deg) {
  const double a = deg_to_rad(tilt_deg);
  const auto opl = [&](double n) {
    const double beta = std::asin(std::sin(a) / n);
    const double d = d_mm * 1e-3;
    return n * d / std::cos(beta) - d * std::tan(beta) * std::sin(a);
  };
  return (opl(n_h) - opl(n_v)) / kSpeedOfLight * 1e15;
}

}  // namespace

TEST_CASE("symmetric grid") {
  const auto g = symmetric_grid({150.0, 101});
  REQUIRE(g.size() == 101);
  CHECK(g.front() == -150.0);
  CHECK(g.back() == 150.0);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(g[k] == -g[g.size() - 1 - k]);
  CHECK(g[50] == 0.0);
}

TEST_CASE("default film spectrum") {
  const SpectralAmplitude s = joint_spectrum(default_stack());
  const auto i = s.intensity();
  for (std::size_t k = 0; k < i.size(); ++k) CHECK(i[k] == doctest::Approx(i[i.size() - 1 - k]).epsilon(1e-12));
  const double fwhm = intensity_fwhm(s);
  CHECK(fwhm > 40.0);
  CHECK(fwhm < 60.0);
  CHECK_THROWS_AS(joint_spectrum(default_stack(), {50.0, 1001}), GridTooNarrow);
}

TEST_CASE("Airy factor reduces to the Fresnel transmission without etalon") {
  FilmStack s;
  s.etalon = false;
  CHECK(std::abs(airy_factor(s, 235.0) - 1.0) < 1e-15);
  s.etalon = true;
  // Index-matched layers: no reflections, unit magnitude.
  s.film = s.substrate = s.ambient = IndexModel::constant(1.5);
  CHECK(std::abs(airy_factor(s, 235.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("HOM dip and peak are complementary") {
  const SpectralAmplitude s = joint_spectrum(default_stack());
  std::vector<double> delays;
  for (int k = -200; k <= 200; ++k) delays.push_back(0.25 * k);
  const auto dip = hom_curve(s, delays, HomMode::Dip);
  const auto peak = hom_curve(s, delays, HomMode::Peak);
  for (std::size_t k = 0; k < delays.size(); ++k) {
    CHECK(std::abs(dip[k].rate + peak[k].rate - 1.0) < 1e-12);
    CHECK(dip[k].rate >= -1e-12);
    CHECK(dip[k].rate <= 1.0 + 1e-12);
    CHECK(dip[k].rate == doctest::Approx(dip[delays.size() - 1 - k].rate).epsilon(1e-12));
  }
  CHECK(std::abs(dip[200].rate) <= 1e-10);
  CHECK(peak[200].rate >= 1.0 - 1e-10);
  CHECK(hom_curve(s, {1000.0}, HomMode::Dip)[0].rate == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("Gaussian spectrum: HOM width matches the closed form") {
  for (double fwhm : {20.0, 35.0, 50.0}) {
    const SpectralAmplitude s = gaussian_spectrum(fwhm);
    CHECK(intensity_fwhm(s) == doctest::Approx(fwhm).epsilon(1e-3));
    const double expected = 2.0 * std::log(2.0) / (kPi * fwhm) * 1e3;
    CHECK(gaussian_hom_width_fs(fwhm) == doctest::Approx(expected));
    CHECK(hom_half_depth_width(s) == doctest::Approx(expected).epsilon(1e-3));
    CHECK(hom_gaussian_fit_width(s, 3.0 * expected) == doctest::Approx(expected).epsilon(2e-3));
  }
}

TEST_CASE("narrower spectra give wider dips") {
  const SpectralAmplitude s = joint_spectrum(default_stack());
  double last_spec = intensity_fwhm(s), last_dip = hom_half_depth_width(s);
  for (double r : {80.0, 45.0, 30.0}) {
    const SpectralAmplitude n = apply_detector_response(s, gaussian_response(s, r));
    const double f = intensity_fwhm(n), w = hom_half_depth_width(n);
    CHECK(f < last_spec);
    CHECK(w > last_dip);
    last_spec = f;
    last_dip = w;
  }
}

TEST_CASE("HOM preconditions") {
  const auto grid = symmetric_grid({150.0, 301});
  std::vector<double> lopsided(grid.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) lopsided[k] = grid[k] > 0 ? 1.0 : 0.2;
  CHECK_THROWS_AS(hom_visibility_kernel(spectrum_from_intensity(grid, lopsided), 3.0), AsymmetricSpectrum);
  CHECK_THROWS_AS(hom_visibility_kernel(spectrum_from_intensity(grid, std::vector<double>(grid.size(), 0.0)), 0.0),
                  PreconditionError);
  std::vector<double> negative(grid.size(), 1.0);
  CHECK_THROWS_AS(apply_detector_response(spectrum_from_intensity(grid, negative), std::vector<double>(3, 1.0)),
                  PreconditionError);
}

TEST_CASE("extraordinary index limits") {
  CHECK(extraordinary_index(1.64, 1.48, 0.0) == doctest::Approx(1.64));
  CHECK(extraordinary_index(1.64, 1.48, kPi / 2) == doctest::Approx(1.48));
  const double mid = extraordinary_index(1.64, 1.48, 0.7);
  CHECK(mid < 1.64);
  CHECK(mid > 1.48);
}

TEST_CASE("plate delay agrees with the Snell's-law construction") {
  const double n_o = 1.6385, n_e = 1.4786;
  for (double tilt : {0.0, 5.0, 10.0, 25.0, -40.0}) {
    const double v = plate_delay_fs({5.0, OpticAxis::Vertical, tilt}, n_o, n_e);
    const double h = plate_delay_fs({5.0, OpticAxis::Horizontal, tilt}, n_o, n_e);
    CHECK(v == doctest::Approx(snell_delay_fs(5.0, n_o, n_e, tilt)).epsilon(1e-10));
    CHECK(h == doctest::Approx(snell_delay_fs(5.0, n_e, n_o, tilt)).epsilon(1e-10));
    CHECK(std::abs(v + h) <= 1e-12);
  }
  // At normal incidence: d (n_o - n_e) / c.
  CHECK(plate_delay_fs({1.0, OpticAxis::Vertical, 0.0}, n_o, n_e) ==
        doctest::Approx(1e-3 * (n_o - n_e) / kSpeedOfLight * 1e15));
}

TEST_CASE("orthogonal plate pair at equal tilt cancels") {
  for (double tilt : {0.0, 7.0, 15.0}) {
    const DelayLine pair{{{5.0, OpticAxis::Vertical, tilt}, {5.0, OpticAxis::Horizontal, -tilt}}};
    CHECK(std::abs(calcite_delay(pair)) < 0.01);
  }
  const DelayLine line = four_plate_line(5.0, 10.0, 1.6385, 1.4786);
  CHECK(std::abs(calcite_delay(line)) < 0.01);
}

TEST_CASE("inner and outer scans move the delay in opposite directions") {
  const DelayLine line = four_plate_line(5.0, 10.0, 1.6385, 1.4786);
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(5.0 + 0.5 * k);
  const auto inner = delay_scan(line, grid, PlatePair::Inner);
  const auto outer = delay_scan(line, grid, PlatePair::Outer);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(inner[k].delay_fs == doctest::Approx(-outer[k].delay_fs).epsilon(1e-9));
    if (k > 0) CHECK((inner[k].delay_fs - inner[k - 1].delay_fs) * (outer[k].delay_fs - outer[k - 1].delay_fs) < 0);
  }
  CHECK(std::abs(inner[10].delay_fs) < 0.01);  // 10 deg is the balanced point
  CHECK_THROWS_AS(delay_scan(DelayLine{{{5.0, OpticAxis::Vertical, 0.0}}}, grid, PlatePair::Inner),
                  PreconditionError);
}

TEST_CASE("delay line validation") {
  CHECK_THROWS_AS(calcite_delay(DelayLine{}), PreconditionError);
  CHECK_THROWS_AS(calcite_delay(DelayLine{{{5.0, OpticAxis::Vertical, 65.0}}}), PreconditionError);
  CHECK_THROWS_AS(calcite_delay(DelayLine{{{-1.0, OpticAxis::Vertical, 0.0}}}), PreconditionError);
  CHECK_THROWS_AS(plate_delay_fs({5.0, OpticAxis::Vertical, 50.0}, 0.5, 0.5), TotalInternalReflection);
}

TEST_CASE("materials file") {
  const MaterialTable t = load_materials(default_materials_path());
  const double n_gap = lookup(t, "GaP").n(1.276);
  CHECK(n_gap > 3.0);
  CHECK(n_gap < 3.2);
  CHECK(lookup(t, "fused_silica").n(1.276) == doctest::Approx(1.447).epsilon(0.002));
  CHECK(lookup(t, "calcite_o").n(1.275) == doctest::Approx(1.6385).epsilon(0.002));
  CHECK(lookup(t, "calcite_e").n(1.275) == doctest::Approx(1.4786).epsilon(0.002));
  CHECK(lookup(t, "GaP").group_index(1.276) > n_gap);
  CHECK_THROWS_AS(lookup(t, "unobtainium"), ConfigError);
  CHECK(wavelength_um_from_thz(thz_from_wavelength_nm(1275.0)) == doctest::Approx(1.275));
}
