#include "qfilm/spectral_hom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "qfilm/errors.hpp"

namespace qfilm {

namespace {

constexpr double kMinGridHalfWidthThz = 100.0;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Wavenumber in 1/m for frequency in THz.
double wavenumber(const IndexModel& m, double nu_thz) {
  return 2.0 * kPi * m.n_at_thz(nu_thz) * nu_thz * 1e12 / kSpeedOfLight;
}

std::vector<double> trapezoid_weights(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n > 1) {
    w.front() = 0.5;
    w.back() = 0.5;
  }
  return w;
}

void check_symmetric(const SpectralAmplitude& s, const std::vector<double>& intensity) {
  const std::size_t n = s.detuning_thz.size();
  const double scale = *std::max_element(intensity.begin(), intensity.end());
  const double step = s.step_thz();
  for (std::size_t k = 0; k < n / 2 + 1; ++k) {
    const std::size_t m = n - 1 - k;
    if (std::abs(s.detuning_thz[k] + s.detuning_thz[m]) > 1e-9 * std::max(1.0, step)) {
      throw AsymmetricSpectrum("detuning grid is not symmetric about zero");
    }
    if (std::abs(intensity[k] - intensity[m]) > 1e-9 * scale) {
      throw AsymmetricSpectrum("|Phi(Omega)|^2 differs from |Phi(-Omega)|^2 at Omega = " +
                               std::to_string(s.detuning_thz[m]) + " THz");
    }
  }
}

}  // namespace

void validate(const FilmStack& stack) {
  if (!(stack.thickness_nm > 0.0)) throw PreconditionError("film thickness must be > 0");
  if (!(stack.pump_wavelength_nm > 0.0)) throw PreconditionError("pump wavelength must be > 0");
}

std::vector<double> SpectralAmplitude::intensity() const {
  std::vector<double> out(amplitude.size());
  for (std::size_t k = 0; k < amplitude.size(); ++k) {
    out[k] = std::norm(amplitude[k]) * (response.empty() ? 1.0 : response[k]);
  }
  return out;
}

double SpectralAmplitude::step_thz() const {
  return detuning_thz.size() > 1 ? detuning_thz[1] - detuning_thz[0] : 0.0;
}

std::vector<double> symmetric_grid(const FrequencyGrid& grid) {
  if (grid.points < 3) throw PreconditionError("frequency grid needs at least 3 points");
  if (!(grid.half_width_thz > 0.0)) throw PreconditionError("frequency grid half-width must be > 0");
  std::vector<double> out(static_cast<std::size_t>(grid.points));
  const double step = 2.0 * grid.half_width_thz / (grid.points - 1);
  for (int k = 0; k < grid.points; ++k) {
    // Computed from both ends so that out[k] == -out[n-1-k] exactly.
    out[static_cast<std::size_t>(k)] = k < grid.points / 2 ? -grid.half_width_thz + k * step
                                                          : grid.half_width_thz - (grid.points - 1 - k) * step;
  }
  if (grid.points % 2 == 1) out[static_cast<std::size_t>(grid.points / 2)] = 0.0;
  return out;
}

Complex airy_factor(const FilmStack& stack, double nu_thz) {
  if (!stack.etalon) return 1.0;
  const double n = stack.film.n_at_thz(nu_thz);
  const double na = stack.ambient.n_at_thz(nu_thz);
  const double ns = stack.substrate.n_at_thz(nu_thz);
  const double ra = (n - na) / (n + na);
  const double rs = (n - ns) / (n + ns);
  const double t = 2.0 * n / (n + ns);
  const double phase = 2.0 * wavenumber(stack.film, nu_thz) * stack.thickness_nm * 1e-9;
  return t / (1.0 - ra * rs * std::polar(1.0, phase));
}

SpectralAmplitude joint_spectrum(const FilmStack& stack, const FrequencyGrid& grid) {
  validate(stack);
  if (grid.half_width_thz < kMinGridHalfWidthThz) {
    throw GridTooNarrow("grid half-width " + std::to_string(grid.half_width_thz) + " THz < 100 THz");
  }
  SpectralAmplitude out;
  out.detuning_thz = symmetric_grid(grid);
  out.amplitude.resize(out.detuning_thz.size());
  out.response.assign(out.detuning_thz.size(), 1.0);

  const double nu_p = thz_from_wavelength_nm(stack.pump_wavelength_nm);
  const double k_p = wavenumber(stack.film, nu_p);
  const Complex a_p = airy_factor(stack, nu_p);
  const double nu_cut = stack.longpass_cut_on_nm > 0.0 ? thz_from_wavelength_nm(stack.longpass_cut_on_nm)
                                                       : std::numeric_limits<double>::infinity();
  const double length_m = stack.thickness_nm * 1e-9;

  for (std::size_t k = 0; k < out.detuning_thz.size(); ++k) {
    const double nu_s = nu_p / 2.0 + out.detuning_thz[k];
    const double nu_i = nu_p / 2.0 - out.detuning_thz[k];
    if (nu_s <= 0.0 || nu_i <= 0.0 || nu_s > nu_cut || nu_i > nu_cut) {
      out.amplitude[k] = 0.0;
      continue;
    }
    const double dk = k_p - wavenumber(stack.film, nu_s) - wavenumber(stack.film, nu_i);
    out.amplitude[k] = sinc(dk * length_m / 2.0) * a_p * airy_factor(stack, nu_s) * airy_factor(stack, nu_i);
  }
  return out;
}

SpectralAmplitude spectrum_from_intensity(const std::vector<double>& detuning_thz,
                                          const std::vector<double>& intensity) {
  if (detuning_thz.size() != intensity.size() || detuning_thz.size() < 3) {
    throw PreconditionError("grid and intensity must have equal length >= 3");
  }
  SpectralAmplitude s;
  s.detuning_thz = detuning_thz;
  s.amplitude.resize(intensity.size());
  for (std::size_t k = 0; k < intensity.size(); ++k) {
    if (!(intensity[k] >= 0.0)) throw PreconditionError("spectral intensity must be >= 0");
    s.amplitude[k] = std::sqrt(intensity[k]);
  }
  s.response.assign(intensity.size(), 1.0);
  return s;
}

SpectralAmplitude apply_detector_response(const SpectralAmplitude& spectrum, const std::vector<double>& response) {
  if (response.size() != spectrum.detuning_thz.size()) {
    throw PreconditionError("detector response must be sampled on the spectrum grid");
  }
  SpectralAmplitude out = spectrum;
  if (out.response.empty()) out.response.assign(response.size(), 1.0);
  for (std::size_t k = 0; k < response.size(); ++k) {
    if (!(response[k] >= 0.0)) throw PreconditionError("detector response must be >= 0");
    out.response[k] *= response[k];
  }
  return out;
}

std::vector<double> gaussian_response(const SpectralAmplitude& spectrum, double fwhm_thz) {
  if (!(fwhm_thz > 0.0)) throw PreconditionError("response FWHM must be > 0");
  std::vector<double> r(spectrum.detuning_thz.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double x = spectrum.detuning_thz[k] / fwhm_thz;
    r[k] = std::exp(-4.0 * std::log(2.0) * x * x);
  }
  return r;
}

double intensity_fwhm(const SpectralAmplitude& spectrum) {
  const auto y = spectrum.intensity();
  const auto& x = spectrum.detuning_thz;
  const auto it = std::max_element(y.begin(), y.end());
  if (!(*it > 0.0)) throw PreconditionError("spectrum has zero intensity");
  const double half = *it / 2.0;
  const auto peak = static_cast<std::size_t>(it - y.begin());

  std::size_t hi = peak;
  while (hi + 1 < y.size() && y[hi + 1] >= half) ++hi;
  std::size_t lo = peak;
  while (lo > 0 && y[lo - 1] >= half) --lo;
  if (hi + 1 >= y.size() || lo == 0) throw GridTooNarrow("intensity does not fall to half maximum within the grid");

  const auto cross = [&](std::size_t inside, std::size_t outside) {
    const double t = (y[inside] - half) / (y[inside] - y[outside]);
    return x[inside] + t * (x[outside] - x[inside]);
  };
  return cross(hi, hi + 1) - cross(lo, lo - 1);
}

double hom_visibility_kernel(const SpectralAmplitude& spectrum, double delay_fs) {
  const auto s = spectrum.intensity();
  const auto w = trapezoid_weights(s.size());
  double norm = 0.0, re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    // 2 pi * (2 Omega [THz]) * tau [fs] * 1e-3
    const double phase = 4.0 * kPi * spectrum.detuning_thz[k] * delay_fs * 1e-3;
    norm += w[k] * s[k];
    re += w[k] * s[k] * std::cos(phase);
    im += w[k] * s[k] * std::sin(phase);
  }
  if (!(norm > 0.0)) throw PreconditionError("spectrum has zero norm");
  if (std::abs(im) > 1e-9 * norm) throw AsymmetricSpectrum("HOM kernel has an imaginary part");
  return re / norm;
}

std::vector<HomPoint> hom_curve(const SpectralAmplitude& spectrum, const std::vector<double>& delays_fs,
                                HomMode mode) {
  const auto s = spectrum.intensity();
  if (std::accumulate(s.begin(), s.end(), 0.0) <= 0.0) throw PreconditionError("spectrum has zero norm");
  check_symmetric(spectrum, s);
  std::vector<HomPoint> out;
  out.reserve(delays_fs.size());
  const double sign = mode == HomMode::Dip ? -1.0 : 1.0;
  for (double tau : delays_fs) {
    const double g = hom_visibility_kernel(spectrum, tau);
    out.push_back({tau, 0.5 * (1.0 + sign * g)});
  }
  return out;
}

double hom_half_depth_width(const SpectralAmplitude& spectrum) {
  check_symmetric(spectrum, spectrum.intensity());
  constexpr double kStep = 0.05;  // fs
  constexpr double kMaxDelay = 1e5;
  double a = 0.0;
  double b = kStep;
  while (hom_visibility_kernel(spectrum, b) > 0.5) {
    a = b;
    b += kStep;
    if (b > kMaxDelay) throw FitFailure("HOM kernel never falls to 1/2");
  }
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (a + b);
    (hom_visibility_kernel(spectrum, m) > 0.5 ? a : b) = m;
  }
  return a + b;  // 2 * midpoint
}

double hom_gaussian_fit_width(const SpectralAmplitude& spectrum, double window_fs) {
  if (!(window_fs > 0.0)) throw PreconditionError("fit window must be > 0");
  constexpr double kSample = 0.05;
  std::vector<double> tau, g;
  for (double t = -window_fs; t <= window_fs + 1e-12; t += kSample) {
    tau.push_back(t);
    g.push_back(hom_visibility_kernel(spectrum, t));
  }
  const double k = 4.0 * std::log(2.0);
  const auto cost = [&](double w) {
    double c = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) c += std::pow(g[i] - std::exp(-k * tau[i] * tau[i] / (w * w)), 2);
    return c;
  };
  const double w0 = hom_half_depth_width(spectrum);
  const auto r = boost::math::tools::brent_find_minima(cost, 0.2 * w0, 5.0 * w0, 40);
  return r.first;
}

double gaussian_hom_width_fs(double intensity_fwhm_thz) {
  return 2.0 * std::log(2.0) / (kPi * intensity_fwhm_thz) * 1e3;
}

void validate(const DelayLine& line) {
  if (line.plates.empty()) throw PreconditionError("delay line has no plates");
  if (!(line.n_o >= 1.0) || !(line.n_e >= 1.0)) throw PreconditionError("calcite indices must be >= 1");
  for (const auto& p : line.plates) {
    if (!(p.thickness_mm > 0.0)) throw PreconditionError("plate thickness must be > 0");
    if (!(std::abs(p.tilt_deg) < 60.0)) throw PreconditionError("plate tilt must satisfy |tilt| < 60 deg");
  }
}

double extraordinary_index(double n_o, double n_e, double theta_rad) {
  const double c = std::cos(theta_rad), s = std::sin(theta_rad);
  return 1.0 / std::sqrt(c * c / (n_o * n_o) + s * s / (n_e * n_e));
}

double plate_delay_fs(const CalcitePlate& plate, double n_o, double n_e) {
  const double s = std::sin(deg_to_rad(plate.tilt_deg));
  const auto optical_path = [&](double n) {
    if (s * s >= n * n) throw TotalInternalReflection("tilt " + std::to_string(plate.tilt_deg) + " deg");
    return std::sqrt(n * n - s * s);
  };
  // The plate turns about its optic axis, so the refracted wavevector stays
  // perpendicular to the axis and the extraordinary wave sees n_e at any tilt.
  const double n_ext = extraordinary_index(n_o, n_e, kPi / 2.0);
  const double n_h = plate.axis == OpticAxis::Horizontal ? n_ext : n_o;
  const double n_v = plate.axis == OpticAxis::Vertical ? n_ext : n_o;
  const double opd_m = plate.thickness_mm * 1e-3 * (optical_path(n_h) - optical_path(n_v));
  return opd_m / kSpeedOfLight * 1e15;
}

double calcite_delay(const DelayLine& line) {
  validate(line);
  double total = 0.0;
  for (const auto& p : line.plates) total += plate_delay_fs(p, line.n_o, line.n_e);
  return total;
}

std::vector<DelayPoint> delay_scan(const DelayLine& line_template, const std::vector<double>& tilt_grid_deg,
                                   PlatePair which) {
  if (line_template.plates.size() != 4) throw PreconditionError("delay scan expects a four-plate line");
  const std::size_t first = which == PlatePair::Inner ? 1 : 0;
  const std::size_t second = which == PlatePair::Inner ? 2 : 3;
  std::vector<DelayPoint> out;
  out.reserve(tilt_grid_deg.size());
  DelayLine line = line_template;
  for (double t : tilt_grid_deg) {
    line.plates[first].tilt_deg = t;
    line.plates[second].tilt_deg = -t;
    out.push_back({t, calcite_delay(line)});
  }
  return out;
}

DelayLine four_plate_line(double thickness_mm, double base_tilt_deg, double n_o, double n_e) {
  DelayLine line;
  line.n_o = n_o;
  line.n_e = n_e;
  line.plates = {{thickness_mm, OpticAxis::Vertical, base_tilt_deg},
                 {thickness_mm, OpticAxis::Horizontal, -base_tilt_deg},
                 {thickness_mm, OpticAxis::Horizontal, base_tilt_deg},
                 {thickness_mm, OpticAxis::Vertical, -base_tilt_deg}};
  return line;
}

}  // namespace qfilm
