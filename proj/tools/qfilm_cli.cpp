// qfilm: command-line front end for the thin-film SPDC model.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qfilm/config.hpp"
#include "qfilm/errors.hpp"
#include "qfilm/pipeline.hpp"
#include "qfilm/report.hpp"

namespace fs = std::filesystem;
using namespace qfilm;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI configuration file (see docs/config.md)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master RNG seed (overrides [run] seed)");
  app->add_option("--out", c.out, "output directory (default: stdout)");
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? parse_config("", fs::current_path()) : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

// Writes `text` to <out>/<name>, or to stdout when no directory was given.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name);
  if (!f) throw ConfigError("cannot write " + (fs::path(c.out) / name).string());
  f << text;
}

int cmd_amplitudes(const Common& c) {
  const ExperimentConfig cfg = load(c);
  std::optional<CalibrationResult> cal;
  const double az = resolve_azimuth(cfg, &cal);
  const Chi2Tensor chi = Chi2Tensor::zinc_blende(cfg.crystal.d_pm_per_v);
  const CrystalOrientation o{cfg.crystal.tilt_deg, az};

  if (c.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(12) << "pump,angle_deg,w1,w2,w3,relative_rate\n";
    for (const auto& p : cfg.pumps) {
      const SpdcResult s = spdc_amplitudes(chi, o, p.ket());
      const auto w = s.state.weights();
      os << p.label << ',' << p.angle_deg << ',' << w(0) << ',' << w(1) << ',' << w(2) << ',' << s.relative_rate
         << '\n';
    }
    emit(c, "amplitudes.csv", os.str());
    return 0;
  }
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["tilt_deg"] = cfg.crystal.tilt_deg;
  j["azimuth_deg"] = az;
  if (cal) j["calibration"] = {{"residual", cal->residual}, {"rms_deviation", cal->rms_deviation}};
  Json pumps = Json::array();
  for (const auto& p : cfg.pumps) {
    const SpdcResult s = spdc_amplitudes(chi, o, p.ket());
    pumps.push_back({{"pump", p.label},
                     {"angle_deg", p.angle_deg},
                     {"state", as_json(s.state)},
                     {"concurrence", concurrence(s.state)},
                     {"schmidt_number", schmidt_number(concurrence(s.state))},
                     {"relative_rate", s.relative_rate}});
  }
  j["pumps"] = pumps;
  emit(c, "amplitudes.json", j.dump(2) + "\n");
  return 0;
}

int cmd_tomography(const Common& c, const std::string& records, const std::string& bundle) {
  if (records.empty() == bundle.empty()) throw ConfigError("give exactly one of --records or --bundle");
  const TomographyBundle b = bundle.empty() ? read_records_csv(records) : read_bundle(bundle);
  const Reconstruction r = reconstruct(b.records, b.protocol);
  if (c.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(12) << "row,col,re,im\n";
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) os << i << ',' << j << ',' << r.rho(i, j).real() << ',' << r.rho(i, j).imag() << '\n';
    emit(c, "reconstruction.csv", os.str());
    return 0;
  }
  Json j = reconstruction_to_json(r);
  j["schema_version"] = kSchemaVersion;
  emit(c, "reconstruction.json", j.dump(2) + "\n");
  return 0;
}

int cmd_bell(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const double az = resolve_azimuth(cfg);
  const Chi2Tensor chi = Chi2Tensor::zinc_blende(cfg.crystal.d_pm_per_v);
  Json pumps = Json::array();
  std::ostringstream csv;
  csv << std::setprecision(12) << "pump,model_f,f,sigma_f\n";
  for (std::size_t i = 0; i < cfg.pumps.size(); ++i) {
    const SpdcResult s = spdc_amplitudes(chi, {cfg.crystal.tilt_deg, az}, cfg.pumps[i].ket());
    const auto rho = QutritDensityMatrix::depolarized(QutritDensityMatrix::pure(s.state), cfg.state_purity_weight);
    const CMat4 rho4 = split_postselect(rho);
    const MeasuredChsh m = simulate_bell(rho, cfg.counting, cfg.seed, i);
    const auto table = correlator_table(rho4);
    csv << cfg.pumps[i].label << ',' << chsh_value(rho4) << ',' << m.f << ',' << m.sigma_f << '\n';
    pumps.push_back({{"pump", cfg.pumps[i].label},
                     {"model_f", chsh_value(rho4)},
                     {"stokes_correlators", table},
                     {"correlators", m.correlators},
                     {"sigmas", m.sigmas},
                     {"f", m.f},
                     {"sigma_f", m.sigma_f},
                     {"violation_sigmas", m.violation_sigmas ? Json(*m.violation_sigmas) : Json(nullptr)}});
  }
  if (c.format == "csv") {
    emit(c, "bell.csv", csv.str());
  } else {
    Json j = {{"schema_version", kSchemaVersion}, {"rng_algorithm", kRngAlgorithm}, {"seed", cfg.seed},
              {"pumps", pumps}};
    emit(c, "bell.json", j.dump(2) + "\n");
  }
  return 0;
}

int cmd_hom(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const HomResult h = run_hom(cfg.spectrum);
  if (c.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(12) << "tau_fs,dip,peak\n";
    for (std::size_t k = 0; k < h.dip.size(); ++k) os << h.dip[k].delay_fs << ',' << h.dip[k].rate << ',' << h.peak[k].rate << '\n';
    emit(c, "hom.csv", os.str());
    return 0;
  }
  Json dip = Json::array();
  for (const auto& p : h.dip) dip.push_back({p.delay_fs, p.rate});
  Json j = {{"schema_version", kSchemaVersion},
            {"spectrum_fwhm_thz", h.spectrum_fwhm_thz},
            {"dip_half_depth_width_fs", h.half_depth_width_fs},
            {"dip_gaussian_fit_width_fs", h.gaussian_fit_width_fs},
            {"dip", dip}};
  emit(c, "hom.json", j.dump(2) + "\n");
  return 0;
}

int cmd_histogram(const Common& c, std::optional<double> pair_rate, double duration) {
  const ExperimentConfig cfg = load(c);
  const auto& k = cfg.counting;
  NoiseModel n;
  n.pair_rate = pair_rate.value_or(k.pair_rate);
  n.background_singles_a = k.background_singles_a;
  n.background_singles_b = k.background_singles_b;
  n.heralding_efficiency = k.heralding_efficiency;
  n.peak_efficiency = k.peak_efficiency;
  n.bin_width_ns = k.bin_width_ns;
  n.seed = cfg.seed;
  const TimeTagHistogram h = simulate_histogram(n, duration, k.bins);
  if (c.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(12) << "dt_ns,counts\n";
    for (const auto& b : h.bins) os << b.dt_ns << ',' << b.counts << '\n';
    emit(c, "histogram.csv", os.str());
    return 0;
  }
  const NetCoincidences net = subtract_accidentals(h, k.exclusion_half_width);
  Json bins = Json::array();
  for (const auto& b : h.bins) bins.push_back({b.dt_ns, b.counts});
  Json j = {{"schema_version", kSchemaVersion},
            {"rng_algorithm", kRngAlgorithm},
            {"seed", cfg.seed},
            {"duration_s", duration},
            {"singles", {h.singles_a, h.singles_b}},
            {"net", net.net},
            {"sigma", net.sigma},
            {"background_per_bin", net.background_per_bin},
            {"bins", bins}};
  emit(c, "histogram.json", j.dump(2) + "\n");
  return 0;
}

int cmd_run(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const RunResult r = run_experiment(cfg);
  const fs::path dir = c.out.empty() ? fs::path("qfilm_out") : fs::path(c.out);
  const Json report = write_run(r, dir);
  std::cout << "report written to " << (dir / "report.json").string() << '\n';
  for (const auto& p : report["pumps"]) {
    const auto& w = p["measures"]["weights"];
    std::cout << "  pump " << p["pump"]["label"].get<std::string>() << ": weights " << w[0]["value"] << ' '
              << w[1]["value"] << ' ' << w[2]["value"] << ", F = " << p["chsh"]["f"] << " +- "
              << p["chsh"]["sigma_f"] << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin-film SPDC polarization-entanglement model"};
  app.require_subcommand(1);

  Common common;
  std::string records, bundle;
  std::optional<double> pair_rate;
  double duration = 60.0;

  auto* amplitudes = app.add_subcommand("amplitudes", "qutrit amplitudes for each configured pump");
  auto* tomography = app.add_subcommand("tomography", "reconstruct a density matrix from coincidence records");
  auto* bell = app.add_subcommand("bell", "simulated CHSH test");
  auto* hom = app.add_subcommand("hom", "two-photon spectrum and HOM dip/peak");
  auto* histogram = app.add_subcommand("histogram", "simulated coincidence histogram");
  auto* run = app.add_subcommand("run", "full pipeline: report.json plus CSV sidecars");
  for (auto* sub : {amplitudes, tomography, bell, hom, histogram, run}) add_common(sub, common);
  tomography->add_option("--records", records, "record CSV")->check(CLI::ExistingFile);
  tomography->add_option("--bundle", bundle, "bundle JSON written by 'run'")->check(CLI::ExistingFile);
  histogram->add_option("--pair-rate", pair_rate, "true coincidences per second");
  histogram->add_option("--duration", duration, "acquisition time in seconds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*amplitudes) return cmd_amplitudes(common);
    if (*tomography) return cmd_tomography(common, records, bundle);
    if (*bell) return cmd_bell(common);
    if (*hom) return cmd_hom(common);
    if (*histogram) return cmd_histogram(common, pair_rate, duration);
    if (*run) return cmd_run(common);
  } catch (const Error& e) {
    std::cerr << "qfilm: " << e.what() << '\n';
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "qfilm: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kNumerical);
  }
  return 0;
}
