#include "qfilm/pipeline.hpp"

#include <cmath>
#include <future>
#include <random>

#include "qfilm/errors.hpp"

namespace qfilm {

namespace {

template <typename F>
auto in_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

std::vector<double> linspace_step(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

NoiseModel noise_for(const CountingConfig& c, double pair_rate, std::uint64_t seed) {
  NoiseModel n;
  n.pair_rate = pair_rate;
  n.background_singles_a = c.background_singles_a;
  n.background_singles_b = c.background_singles_b;
  n.heralding_efficiency = c.heralding_efficiency;
  n.peak_efficiency = c.peak_efficiency;
  n.bin_width_ns = c.bin_width_ns;
  n.seed = seed;
  return n;
}

// One measurement setting: expected true coincidence rate in, net counts out.
struct CountResult {
  double raw = 0.0;
  double accidental = 0.0;
  double sigma = 0.0;
  TimeTagHistogram histogram;
};

CountResult count_setting(const CountingConfig& c, double rate, double duration_s, std::uint64_t seed) {
  CountResult out;
  if (c.noiseless) {
    out.raw = rate * duration_s * c.peak_efficiency;
    return out;
  }
  Rng rng(seed);
  out.histogram = simulate_histogram(noise_for(c, rate, seed), duration_s, c.bins, rng);
  const NetCoincidences net = subtract_accidentals(out.histogram, c.exclusion_half_width);
  out.raw = net.raw_peak;
  out.accidental = net.accidental_estimate;
  out.sigma = net.sigma;
  return out;
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::uint64_t tomography_stream(std::size_t pump_index, std::size_t setting_index) {
  return pump_index * 10000 + setting_index;
}
std::uint64_t bell_stream(std::size_t pump_index, std::size_t combination_index) {
  return pump_index * 10000 + 1000 + combination_index;
}
std::uint64_t bootstrap_stream(std::size_t pump_index) { return pump_index * 10000 + 2000; }

double resolve_azimuth(const ExperimentConfig& config, std::optional<CalibrationResult>* calibration) {
  if (config.crystal.azimuth_deg) return *config.crystal.azimuth_deg;
  std::vector<WeightTarget> targets;
  for (const auto& [pump, w] : config.crystal.targets) targets.push_back({pump.ket(), w});
  const CalibrationResult r = calibrate_azimuth(Chi2Tensor::zinc_blende(config.crystal.d_pm_per_v),
                                                config.crystal.tilt_deg, targets, config.crystal.calibration);
  if (calibration) *calibration = r;
  return r.azimuth_deg;
}

SimulatedRecords simulate_tomography(const QutritDensityMatrix& rho, const TomographyProtocol& protocol,
                                     const CountingConfig& counting, std::uint64_t master_seed,
                                     std::size_t pump_index) {
  // <w|rho|w> counts both arm assignments; the splitter halves it.
  const std::vector<double> rates = forward_rates(rho, protocol, counting.pair_rate / 2.0);
  std::vector<std::future<CountResult>> jobs;
  jobs.reserve(rates.size());
  for (std::size_t m = 0; m < rates.size(); ++m) {
    const std::uint64_t seed = derive_seed(master_seed, tomography_stream(pump_index, m));
    jobs.push_back(std::async(std::launch::async, count_setting, std::cref(counting), rates[m],
                              counting.tomography_duration_s, seed));
  }
  SimulatedRecords out;
  for (std::size_t m = 0; m < jobs.size(); ++m) {
    CountResult r = jobs[m].get();
    out.records.push_back({m, r.raw, r.accidental, counting.tomography_duration_s});
    out.sigmas.push_back(r.sigma);
    if (m == 0) out.first_histogram = std::move(r.histogram);
  }
  return out;
}

MeasuredChsh simulate_bell(const QutritDensityMatrix& rho, const CountingConfig& counting,
                           std::uint64_t master_seed, std::size_t pump_index) {
  const CMat4 rho4 = split_postselect(rho);
  const ChshSettings s = default_chsh_settings();
  // Order matches MeasuredChsh: (a,b), (a',b), (a,b'), (a',b').
  const std::array<std::pair<const CMat2*, const CMat2*>, 4> pairs{
      {{&s.a, &s.b}, {&s.a_prime, &s.b}, {&s.a, &s.b_prime}, {&s.a_prime, &s.b_prime}}};

  std::vector<std::future<CountResult>> jobs;
  for (std::size_t p = 0; p < 4; ++p) {
    const auto ka = eigen_kets(*pairs[p].first);
    const auto kb = eigen_kets(*pairs[p].second);
    for (std::size_t o = 0; o < 4; ++o) {
      const CVec2& xa = ka[o / 2];
      const CVec2& xb = kb[o % 2];
      const CVec4 ket(xa(0) * xb(0), xa(0) * xb(1), xa(1) * xb(0), xa(1) * xb(1));
      const double prob = std::max(0.0, (ket.adjoint() * rho4 * ket)(0, 0).real());
      const std::uint64_t seed = derive_seed(master_seed, bell_stream(pump_index, 4 * p + o));
      jobs.push_back(std::async(std::launch::async, count_setting, std::cref(counting), counting.pair_rate * prob,
                                counting.bell_duration_s, seed));
    }
  }
  std::array<CorrelatorCounts, 4> counts;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const CountResult r = jobs[k].get();
    counts[k / 4].net[k % 4] = r.raw - r.accidental;
    counts[k / 4].variance[k % 4] = r.sigma * r.sigma;
  }
  return chsh_from_counts(counts);
}

HomResult run_hom(const SpectrumConfig& cfg) {
  HomResult out;
  out.spectrum = joint_spectrum(make_film_stack(cfg), cfg.grid);
  if (cfg.detector_response_fwhm_thz > 0.0) {
    out.spectrum =
        apply_detector_response(out.spectrum, gaussian_response(out.spectrum, cfg.detector_response_fwhm_thz));
  }
  out.spectrum_fwhm_thz = intensity_fwhm(out.spectrum);
  const auto delays = linspace_step(cfg.delay_min_fs, cfg.delay_max_fs, cfg.delay_step_fs);
  out.dip = hom_curve(out.spectrum, delays, HomMode::Dip);
  out.peak = hom_curve(out.spectrum, delays, HomMode::Peak);
  out.half_depth_width_fs = hom_half_depth_width(out.spectrum);
  out.gaussian_fit_width_fs = hom_gaussian_fit_width(out.spectrum, cfg.fit_window_fs);
  return out;
}

DelayLineResult run_delay_line(const DelayLineConfig& cfg, const MaterialTable& materials) {
  const DelayLine line = make_delay_line(cfg, materials);
  DelayLineResult out;
  out.base_delay_fs = calcite_delay(line);
  const auto grid = linspace_step(cfg.scan_min_deg, cfg.scan_max_deg, cfg.scan_step_deg);
  out.inner = delay_scan(line, grid, PlatePair::Inner);
  out.outer = delay_scan(line, grid, PlatePair::Outer);
  return out;
}

namespace {

PumpResult run_pump(const ExperimentConfig& cfg, double azimuth_deg, const PumpSetting& pump, std::size_t index) {
  PumpResult out;
  out.pump = pump;
  const Chi2Tensor chi = Chi2Tensor::zinc_blende(cfg.crystal.d_pm_per_v);

  in_stage("crystal_tensor", [&] {
    const SpdcResult s = spdc_amplitudes(chi, {cfg.crystal.tilt_deg, azimuth_deg}, pump.ket());
    out.model_state = s.state;
    out.relative_rate = s.relative_rate;
    out.rho_true =
        QutritDensityMatrix::depolarized(QutritDensityMatrix::pure(s.state), cfg.state_purity_weight);
    return 0;
  });

  in_stage("experiment_sim", [&] {
    SimulatedRecords sim = simulate_tomography(out.rho_true, cfg.protocol, cfg.counting, cfg.seed, index);
    out.records = std::move(sim.records);
    out.record_sigmas = std::move(sim.sigmas);
    out.first_histogram = std::move(sim.first_histogram);
    return 0;
  });

  in_stage("tomography", [&] {
    out.reconstruction = reconstruct(out.records, cfg.protocol);
    const QutritDensityMatrix& rho = out.reconstruction.rho;
    for (int i = 0; i < 3; ++i) out.weights[static_cast<std::size_t>(i)].value = rho(i, i).real();
    const EntanglementSummary summary = summarize_entanglement(rho);
    out.purity.value = summary.purity;
    out.low_purity = summary.low_purity;
    if (summary.concurrence) out.concurrence = Measured{*summary.concurrence, 0.0};
    if (summary.schmidt_number) out.schmidt_number = Measured{*summary.schmidt_number, 0.0};

    const int samples = cfg.counting.noiseless ? 0 : cfg.counting.bootstrap_samples;
    if (samples > 1) {
      Rng rng(derive_seed(cfg.seed, bootstrap_stream(index)));
      std::normal_distribution<double> unit(0.0, 1.0);
      std::array<std::vector<double>, 3> w;
      std::vector<double> pur, conc, schmidt;
      std::vector<double> rates(out.records.size());
      for (int b = 0; b < samples; ++b) {
        for (std::size_t m = 0; m < rates.size(); ++m) {
          rates[m] = (out.records[m].net_coincidences() + out.record_sigmas[m] * unit(rng)) /
                     out.records[m].duration_s;
        }
        const Reconstruction rb = reconstruct_from_rates(rates, cfg.protocol);
        for (int i = 0; i < 3; ++i) w[static_cast<std::size_t>(i)].push_back(rb.rho(i, i).real());
        const EntanglementSummary sb = summarize_entanglement(rb.rho);
        pur.push_back(sb.purity);
        if (sb.concurrence) conc.push_back(*sb.concurrence);
        if (sb.schmidt_number) schmidt.push_back(*sb.schmidt_number);
      }
      for (std::size_t i = 0; i < 3; ++i) out.weights[i].sigma = stddev(w[i]);
      out.purity.sigma = stddev(pur);
      if (out.concurrence) out.concurrence->sigma = stddev(conc);
      if (out.schmidt_number) out.schmidt_number->sigma = stddev(schmidt);
    }

    const auto grid = linspace_step(0.0, 180.0, cfg.fringe_step_deg);
    for (FixedAnalyzer f : cfg.fringe_analyzers) out.fringes.push_back({f, fringe_scan(rho, f, grid)});
    return 0;
  });

  in_stage("bell_chsh", [&] {
    out.chsh_model = chsh_value(split_postselect(out.rho_true));
    out.chsh = simulate_bell(out.rho_true, cfg.counting, cfg.seed, index);
    return 0;
  });
  return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  result.config = config;
  result.azimuth_deg = in_stage("crystal_tensor", [&] { return resolve_azimuth(config, &result.calibration); });
  for (std::size_t i = 0; i < config.pumps.size(); ++i) {
    result.pumps.push_back(run_pump(config, result.azimuth_deg, config.pumps[i], i));
  }
  result.hom = in_stage("spectral_hom", [&] { return run_hom(config.spectrum); });
  result.delay_line = in_stage("spectral_hom", [&] {
    return run_delay_line(config.delay_line, load_materials(materials_path(config.spectrum)));
  });
  return result;
}

}  // namespace qfilm
