#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qfilm/bell_chsh.hpp"
#include "qfilm/config.hpp"
#include "qfilm/crystal_tensor.hpp"
#include "qfilm/experiment_sim.hpp"
#include "qfilm/spectral_hom.hpp"
#include "qfilm/tomography.hpp"

namespace qfilm {

struct Measured {
  double value = 0.0;
  double sigma = 0.0;
};

struct FringeResult {
  FixedAnalyzer fixed;
  FringeScan scan;
};

struct PumpResult {
  PumpSetting pump;
  QutritState model_state = QutritState::orthogonal_pair();
  double relative_rate = 0.0;
  QutritDensityMatrix rho_true = QutritDensityMatrix::maximally_mixed();

  TimeTagHistogram first_histogram;  // setting 0, kept for the sidecar
  std::vector<CoincidenceRecord> records;
  std::vector<double> record_sigmas;  // net-count sigma per setting
  Reconstruction reconstruction{QutritDensityMatrix::maximally_mixed(), {}};

  std::array<Measured, 3> weights;
  Measured purity;
  std::optional<Measured> concurrence;  // dominant eigenstate, empty if degenerate
  std::optional<Measured> schmidt_number;
  bool low_purity = false;

  std::vector<FringeResult> fringes;

  double chsh_model = 0.0;  // F of rho_true through the splitter
  MeasuredChsh chsh;
};

struct HomResult {
  SpectralAmplitude spectrum;
  double spectrum_fwhm_thz = 0.0;
  std::vector<HomPoint> dip;
  std::vector<HomPoint> peak;
  double half_depth_width_fs = 0.0;
  double gaussian_fit_width_fs = 0.0;
};

struct DelayLineResult {
  double base_delay_fs = 0.0;
  std::vector<DelayPoint> inner;
  std::vector<DelayPoint> outer;
};

struct RunResult {
  ExperimentConfig config;
  std::optional<CalibrationResult> calibration;  // empty when the azimuth was fixed
  double azimuth_deg = 0.0;
  std::vector<PumpResult> pumps;
  HomResult hom;
  DelayLineResult delay_line;
};

// Seed-stream indices used by the pipeline (see derive_seed).
std::uint64_t tomography_stream(std::size_t pump_index, std::size_t setting_index);
std::uint64_t bell_stream(std::size_t pump_index, std::size_t combination_index);
std::uint64_t bootstrap_stream(std::size_t pump_index);

// Stage helpers, usable on their own.
double resolve_azimuth(const ExperimentConfig& config, std::optional<CalibrationResult>* calibration = nullptr);

// Net coincidence counts for each tomography setting, simulated concurrently.
// In noiseless mode the counts are the exact expectation and sigmas are zero.
struct SimulatedRecords {
  std::vector<CoincidenceRecord> records;
  std::vector<double> sigmas;
  TimeTagHistogram first_histogram;
};
SimulatedRecords simulate_tomography(const QutritDensityMatrix& rho, const TomographyProtocol& protocol,
                                     const CountingConfig& counting, std::uint64_t master_seed,
                                     std::size_t pump_index);

MeasuredChsh simulate_bell(const QutritDensityMatrix& rho, const CountingConfig& counting,
                           std::uint64_t master_seed, std::size_t pump_index);

HomResult run_hom(const SpectrumConfig& spectrum);
DelayLineResult run_delay_line(const DelayLineConfig& config, const MaterialTable& materials);

// Full pipeline. Errors are rethrown as StageError tagged with the stage name.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace qfilm
