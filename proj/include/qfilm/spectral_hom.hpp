#pragma once

#include <vector>

#include "qfilm/materials.hpp"
#include "qfilm/types.hpp"

namespace qfilm {

// Thin nonlinear film between an ambient half-space and a substrate layer.
struct FilmStack {
  double thickness_nm = 400.0;
  double pump_wavelength_nm = 638.0;
  IndexModel film = IndexModel::constant(3.1);
  IndexModel substrate = IndexModel::constant(1.45);
  IndexModel ambient = IndexModel::constant(1.0);
  // Long-pass filter cut-on applied to both photons; <= 0 disables it.
  double longpass_cut_on_nm = 0.0;
  // When false the Fabry-Perot factors are replaced by 1.
  bool etalon = true;
};

void validate(const FilmStack& stack);

struct FrequencyGrid {
  double half_width_thz = 150.0;
  int points = 4096;
};

// Degenerate two-photon spectrum: signal at nu_p/2 + Omega, idler at
// nu_p/2 - Omega, Omega in THz (ordinary frequency).
struct SpectralAmplitude {
  std::vector<double> detuning_thz;  // uniform, symmetric about 0
  std::vector<Complex> amplitude;    // Phi(Omega)
  std::vector<double> response;      // detector weighting of |Phi|^2, defaults to 1

  std::vector<double> intensity() const;  // |Phi|^2 * response
  double step_thz() const;
};

// Uniform grid of `points` samples over [-half_width, +half_width].
std::vector<double> symmetric_grid(const FrequencyGrid& grid);

// Phi = sinc(dk L/2) A_p(nu_p) A_s(nu_s) A_i(nu_i), with dk = k_p - k_s - k_i
// and A the film's Airy field factor t / (1 - r_amb r_sub exp(2 i k L)).
// Throws GridTooNarrow when the grid does not reach +-100 THz.
SpectralAmplitude joint_spectrum(const FilmStack& stack, const FrequencyGrid& grid = {});

// Single-photon Airy field factor of the film at a frequency (THz).
Complex airy_factor(const FilmStack& stack, double frequency_thz);

// Spectrum with an arbitrary |Phi|^2 (phase zero) on a given grid.
SpectralAmplitude spectrum_from_intensity(const std::vector<double>& detuning_thz,
                                          const std::vector<double>& intensity);

// Multiplies the |Phi|^2 weighting pointwise; response must be >= 0 and on the same grid.
SpectralAmplitude apply_detector_response(const SpectralAmplitude& spectrum, const std::vector<double>& response);

// exp(-4 ln2 Omega^2 / fwhm^2) on the spectrum's grid.
std::vector<double> gaussian_response(const SpectralAmplitude& spectrum, double fwhm_thz);

// Full width at half maximum of the intensity lobe around its maximum,
// with linear interpolation between samples.
double intensity_fwhm(const SpectralAmplitude& spectrum);

enum class HomMode { Dip, Peak };

struct HomPoint {
  double delay_fs;
  double rate;  // normalized coincidence rate
};

// g(tau) = Re sum |Phi|^2 exp(i 2 pi (2 Omega) tau) / sum |Phi|^2 (trapezoidal
// weights); the interference term oscillates at the signal-idler frequency
// difference 2 Omega. R = (1 -+ g)/2 for dip / peak.
// Throws AsymmetricSpectrum and PreconditionError (zero norm).
double hom_visibility_kernel(const SpectralAmplitude& spectrum, double delay_fs);
std::vector<HomPoint> hom_curve(const SpectralAmplitude& spectrum, const std::vector<double>& delays_fs,
                                HomMode mode);

// Full width of the dip (= peak) at half depth, i.e. 2 tau with g(tau) = 1/2.
double hom_half_depth_width(const SpectralAmplitude& spectrum);

// FWHM of a Gaussian exp(-4 ln2 tau^2 / w^2) least-squares fitted to g(tau)
// on |tau| <= window_fs (sampled at 0.05 fs). The experimental widths are
// Gaussian-fit widths, so this is the number to compare with measurements.
double hom_gaussian_fit_width(const SpectralAmplitude& spectrum, double window_fs);

// Closed form for a Gaussian |Phi|^2 of intensity FWHM dnu (THz): 2 ln2 / (pi dnu), in fs.
double gaussian_hom_width_fs(double intensity_fwhm_thz);

enum class OpticAxis { Vertical, Horizontal };

struct CalcitePlate {
  double thickness_mm = 5.0;
  OpticAxis axis = OpticAxis::Vertical;
  double tilt_deg = 0.0;  // rotation about the plate's optic axis
};

struct DelayLine {
  std::vector<CalcitePlate> plates;
  double n_o = 1.6385;
  double n_e = 1.4786;
};

void validate(const DelayLine& line);

// Index of the extraordinary wave at angle theta to the optic axis:
// 1/n^2 = cos^2/n_o^2 + sin^2/n_e^2.
double extraordinary_index(double n_o, double n_e, double theta_rad);

// Delay of the H photon relative to the V photon through one plate, fs.
// The optical path of a plate tilted by alpha is d sqrt(n^2 - sin^2 alpha)
// (internal path plus the outside path difference to the same exit wavefront).
double plate_delay_fs(const CalcitePlate& plate, double n_o, double n_e);

// Sum of plate delays (H minus V), fs. Throws TotalInternalReflection,
// PreconditionError for invalid plates.
double calcite_delay(const DelayLine& line);

enum class PlatePair { Inner, Outer };

struct DelayPoint {
  double tilt_deg;
  double delay_fs;
};

// Four-plate line: outer pair = plates 0 and 3, inner pair = plates 1 and 2.
// Sets the selected pair's tilt to each grid value (mirrored sign on the
// second plate) and reports the total delay.
std::vector<DelayPoint> delay_scan(const DelayLine& line_template, const std::vector<double>& tilt_grid_deg,
                                   PlatePair which);

// Outer plates with vertical optic axes, inner with horizontal ones, all at base_tilt.
DelayLine four_plate_line(double thickness_mm, double base_tilt_deg, double n_o, double n_e);

}  // namespace qfilm
