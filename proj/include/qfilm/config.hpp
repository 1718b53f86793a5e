#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfilm/crystal_tensor.hpp"
#include "qfilm/experiment_sim.hpp"
#include "qfilm/spectral_hom.hpp"
#include "qfilm/tomography.hpp"

namespace qfilm {

// Pump polarization as written in the config: "H", "V", or a linear angle in degrees.
struct PumpSetting {
  std::string label;
  double angle_deg = 0.0;
  PolarizationKet ket() const { return PolarizationKet::linear(angle_deg); }
};

PumpSetting parse_pump(const std::string& text);

struct CrystalConfig {
  double d_pm_per_v = 100.0;
  double tilt_deg = 15.0;
  std::optional<double> azimuth_deg;  // empty: calibrate against the targets
  CalibrationOptions calibration;
  std::vector<std::pair<PumpSetting, Eigen::Vector3d>> targets;
};

struct CountingConfig {
  bool noiseless = false;
  double pair_rate = 20.0;  // post-selected coincidences/s without analyzers
  double background_singles_a = 2.0e4;
  double background_singles_b = 2.0e4;
  double heralding_efficiency = 0.1;
  double peak_efficiency = 1.0;
  double bin_width_ns = 0.1;
  int bins = 201;
  int exclusion_half_width = 0;
  double tomography_duration_s = 60.0;  // per analyzer setting
  double bell_duration_s = 5.0;         // per outcome combination
  int bootstrap_samples = 200;
};

struct SpectrumConfig {
  std::filesystem::path materials_file;
  std::string film = "GaP";
  std::string substrate = "fused_silica";
  std::string ambient = "air";
  double thickness_nm = 400.0;
  double pump_wavelength_nm = 638.0;
  double longpass_cut_on_nm = 1000.0;
  FrequencyGrid grid;
  double detector_response_fwhm_thz = 0.0;  // 0: no detector weighting
  double delay_min_fs = -60.0;
  double delay_max_fs = 60.0;
  double delay_step_fs = 0.5;
  double fit_window_fs = 30.0;
};

struct DelayLineConfig {
  double plate_thickness_mm = 5.0;
  double base_tilt_deg = 10.0;
  std::string ordinary = "calcite_o";
  std::string extraordinary = "calcite_e";
  double wavelength_nm = 1275.0;
  double scan_min_deg = 5.0;
  double scan_max_deg = 15.0;
  double scan_step_deg = 0.5;
};

struct ExperimentConfig {
  std::filesystem::path source;  // file the config was read from, if any
  CrystalConfig crystal;
  std::vector<PumpSetting> pumps;
  double state_purity_weight = 1.0;  // p in p|psi><psi| + (1-p) I/3
  TomographyProtocol protocol = TomographyProtocol::default_nine();
  std::vector<FixedAnalyzer> fringe_analyzers{FixedAnalyzer::H, FixedAnalyzer::V, FixedAnalyzer::D,
                                              FixedAnalyzer::A};
  double fringe_step_deg = 2.0;
  CountingConfig counting;
  SpectrumConfig spectrum;
  DelayLineConfig delay_line;
  std::uint64_t seed = 1;
  // Informational metadata carried into the report.
  double pump_power_mw = 60.0;
  double bandpass_center_nm = 1275.0;
  double bandpass_fwhm_nm = 50.0;
};

// Parses the INI grammar documented in docs/config.md. Relative paths are
// resolved against the config file's directory. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

// Materials file shipped with the sources.
std::filesystem::path default_materials_path();
// cfg.materials_file, or the shipped file when unset.
std::filesystem::path materials_path(const SpectrumConfig& cfg);

FilmStack make_film_stack(const SpectrumConfig& cfg);
DelayLine make_delay_line(const DelayLineConfig& cfg, const MaterialTable& materials);

}  // namespace qfilm
