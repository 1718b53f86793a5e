#include "qfilm/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "qfilm/errors.hpp"

namespace qfilm {

namespace fs = std::filesystem;

namespace {

const char* analyzer_name(FixedAnalyzer f) {
  switch (f) {
    case FixedAnalyzer::H: return "H";
    case FixedAnalyzer::V: return "V";
    case FixedAnalyzer::D: return "D";
    case FixedAnalyzer::A: return "A";
  }
  return "?";
}

Json measured(const Measured& m) { return {{"value", m.value}, {"sigma", m.sigma}}; }

template <typename M>
Json matrix_json(const M& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(as_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(12);
  return out;
}

std::string file_label(const std::string& label) {
  std::string s;
  for (char c : label) s += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return s;
}

Json setting_json(const AnalyzerSetting& s) { return {{"qwp_deg", s.qwp_deg}, {"hwp_deg", s.hwp_deg}}; }

double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(std::string("bundle: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

AnalyzerSetting setting_from(const Json& j) {
  if (!j.is_object()) throw ConfigError("bundle: analyzer setting must be an object");
  return {number(j, "qwp_deg"), number(j, "hwp_deg")};
}

}  // namespace

Json as_json(Complex z) { return Json::array({z.real(), z.imag()}); }
Json as_json(const CMat3& m) { return matrix_json(m); }
Json as_json(const CMat4& m) { return matrix_json(m); }
Json as_json(const QutritState& s) {
  return {{"amplitudes", Json::array({as_json(s.c1()), as_json(s.c2()), as_json(s.c3())})},
          {"weights", Json::array({s.weights()(0), s.weights()(1), s.weights()(2)})}};
}

Json reconstruction_to_json(const Reconstruction& r) {
  const EntanglementSummary s = summarize_entanglement(r.rho);
  Json j;
  j["density_matrix"] = as_json(r.rho.matrix());
  j["weights"] = Json::array({r.rho(0, 0).real(), r.rho(1, 1).real(), r.rho(2, 2).real()});
  j["purity"] = s.purity;
  j["top_eigenvalue"] = s.top_eigenvalue;
  j["concurrence"] = s.concurrence ? Json(*s.concurrence) : Json(nullptr);
  j["schmidt_number"] = s.schmidt_number ? Json(*s.schmidt_number) : Json(nullptr);
  j["low_purity"] = s.low_purity;
  j["fit"] = {{"scale", r.report.scale},
              {"weighted_chi2", r.report.weighted_chi2},
              {"negative_eigen_mass", r.report.negative_eigen_mass},
              {"residuals", r.report.residuals}};
  return j;
}

Json as_json(const RunResult& r, const Json& files) {
  const ExperimentConfig& c = r.config;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["generated_at"] = utc_timestamp();
  j["rng_algorithm"] = kRngAlgorithm;
  j["seed"] = c.seed;
  j["config"] = {{"source", c.source.string()},
                 {"noiseless", c.counting.noiseless},
                 {"pump_power_mw", c.pump_power_mw},
                 {"pump_wavelength_nm", c.spectrum.pump_wavelength_nm},
                 {"bandpass_center_nm", c.bandpass_center_nm},
                 {"bandpass_fwhm_nm", c.bandpass_fwhm_nm},
                 {"state_purity_weight", c.state_purity_weight},
                 {"pair_rate", c.counting.pair_rate},
                 {"tomography_duration_s", c.counting.tomography_duration_s},
                 {"bell_duration_s", c.counting.bell_duration_s}};

  Json crystal = {{"d_pm_per_v", c.crystal.d_pm_per_v},
                  {"tilt_deg", c.crystal.tilt_deg},
                  {"azimuth_deg", r.azimuth_deg}};
  if (r.calibration) {
    crystal["calibration"] = {{"residual", r.calibration->residual},
                              {"rms_deviation", r.calibration->rms_deviation}};
  }
  j["crystal"] = crystal;

  Json pumps = Json::array();
  for (const PumpResult& p : r.pumps) {
    Json pj;
    pj["pump"] = {{"label", p.pump.label}, {"angle_deg", p.pump.angle_deg}};
    pj["model_state"] = as_json(p.model_state);
    pj["relative_rate"] = p.relative_rate;
    pj["true_density_matrix"] = as_json(p.rho_true.matrix());

    Json records = Json::array();
    for (std::size_t m = 0; m < p.records.size(); ++m) {
      const auto& rec = p.records[m];
      records.push_back({{"setting", c.protocol.settings()[rec.setting_index].label},
                         {"raw", rec.raw_coincidences},
                         {"accidental", rec.accidental_estimate},
                         {"net", rec.net_coincidences()},
                         {"sigma", p.record_sigmas[m]},
                         {"duration_s", rec.duration_s}});
    }
    pj["records"] = records;
    pj["reconstruction"] = reconstruction_to_json(p.reconstruction);
    pj["measures"] = {
        {"weights", Json::array({measured(p.weights[0]), measured(p.weights[1]), measured(p.weights[2])})},
        {"purity", measured(p.purity)},
        {"concurrence", p.concurrence ? measured(*p.concurrence) : Json(nullptr)},
        {"schmidt_number", p.schmidt_number ? measured(*p.schmidt_number) : Json(nullptr)},
        {"low_purity", p.low_purity}};

    Json fringes = Json::array();
    for (const auto& f : p.fringes) {
      fringes.push_back({{"fixed_b", analyzer_name(f.fixed)},
                         {"visibility", f.scan.visibility},
                         {"theta_min_deg", f.scan.theta_min_deg},
                         {"theta_max_deg", f.scan.theta_max_deg},
                         {"fit",
                          {{"offset", f.scan.fit.offset},
                           {"cos2", f.scan.fit.cos2},
                           {"sin2", f.scan.fit.sin2},
                           {"cos4", f.scan.fit.cos4},
                           {"sin4", f.scan.fit.sin4}}}});
    }
    pj["fringes"] = fringes;

    const auto& b = p.chsh;
    pj["chsh"] = {{"model_f", p.chsh_model},
                  {"correlators", {{"E_ab", b.correlators[0]},
                                   {"E_a'b", b.correlators[1]},
                                   {"E_ab'", b.correlators[2]},
                                   {"E_a'b'", b.correlators[3]}}},
                  {"sigmas", b.sigmas},
                  {"f", b.f},
                  {"sigma_f", b.sigma_f},
                  {"violation_sigmas", b.violation_sigmas ? Json(*b.violation_sigmas) : Json(nullptr)}};
    if (files.contains("pumps") && files["pumps"].contains(p.pump.label)) pj["files"] = files["pumps"][p.pump.label];
    pumps.push_back(pj);
  }
  j["pumps"] = pumps;

  j["hom"] = {{"spectrum_fwhm_thz", r.hom.spectrum_fwhm_thz},
              {"dip_half_depth_width_fs", r.hom.half_depth_width_fs},
              {"dip_gaussian_fit_width_fs", r.hom.gaussian_fit_width_fs},
              {"detector_response_fwhm_thz", c.spectrum.detector_response_fwhm_thz}};
  j["delay_line"] = {{"base_delay_fs", r.delay_line.base_delay_fs},
                     {"plate_thickness_mm", c.delay_line.plate_thickness_mm},
                     {"base_tilt_deg", c.delay_line.base_tilt_deg}};
  if (files.contains("global")) j["files"] = files["global"];
  return j;
}

std::string canonical_json(Json report) {
  report.erase("generated_at");
  return report.dump(2);
}

void write_histogram_csv(const TimeTagHistogram& h, const fs::path& path) {
  auto out = open_out(path);
  out << "dt_ns,counts\n";
  for (const auto& b : h.bins) out << b.dt_ns << ',' << b.counts << '\n';
}

void write_fringe_csv(const std::vector<FringeResult>& fringes, const fs::path& path) {
  auto out = open_out(path);
  out << "fixed_b,theta_deg,rate\n";
  for (const auto& f : fringes) {
    for (std::size_t k = 0; k < f.scan.theta_deg.size(); ++k) {
      out << analyzer_name(f.fixed) << ',' << f.scan.theta_deg[k] << ',' << f.scan.rates[k] << '\n';
    }
  }
}

void write_hom_csv(const std::vector<HomPoint>& curve, const fs::path& path) {
  auto out = open_out(path);
  out << "tau_fs,rate\n";
  for (const auto& p : curve) out << p.delay_fs << ',' << p.rate << '\n';
}

void write_spectrum_csv(const SpectralAmplitude& spectrum, const fs::path& path) {
  auto out = open_out(path);
  out << "omega_thz,intensity\n";
  const auto intensity = spectrum.intensity();
  for (std::size_t k = 0; k < intensity.size(); ++k) out << spectrum.detuning_thz[k] << ',' << intensity[k] << '\n';
}

void write_delay_csv(const DelayLineResult& r, const fs::path& path) {
  auto out = open_out(path);
  out << "pair,tilt_deg,delay_fs\n";
  for (const auto& p : r.inner) out << "inner," << p.tilt_deg << ',' << p.delay_fs << '\n';
  for (const auto& p : r.outer) out << "outer," << p.tilt_deg << ',' << p.delay_fs << '\n';
}

Json bundle_to_json(const TomographyBundle& b) {
  Json settings = Json::array();
  for (const auto& s : b.protocol.settings()) {
    settings.push_back({{"label", s.label}, {"a", setting_json(s.a)}, {"b", setting_json(s.b)}});
  }
  Json records = Json::array();
  for (const auto& r : b.records) {
    records.push_back({{"setting_index", r.setting_index},
                       {"raw", r.raw_coincidences},
                       {"accidental", r.accidental_estimate},
                       {"duration_s", r.duration_s}});
  }
  return {{"schema_version", kSchemaVersion}, {"protocol", settings}, {"records", records}};
}

TomographyBundle bundle_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("protocol") || !j.contains("records") || !j["protocol"].is_array() ||
      !j["records"].is_array()) {
    throw ConfigError("bundle: expected an object with 'protocol' and 'records' arrays");
  }
  std::vector<SettingPair> settings;
  for (const auto& s : j["protocol"]) {
    if (!s.contains("a") || !s.contains("b")) throw ConfigError("bundle: setting needs 'a' and 'b'");
    settings.push_back({setting_from(s["a"]), setting_from(s["b"]), s.value("label", std::string{})});
  }
  if (settings.empty()) throw ConfigError("bundle: protocol is empty");
  TomographyBundle out{TomographyProtocol(std::move(settings)), {}};
  for (const auto& r : j["records"]) {
    const double index = number(r, "setting_index");
    if (index < 0 || index != std::floor(index)) throw ConfigError("bundle: bad setting_index");
    out.records.push_back(
        {static_cast<std::size_t>(index), number(r, "raw"), number(r, "accidental"), number(r, "duration_s")});
  }
  return out;
}

TomographyBundle read_bundle(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return bundle_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw ConfigError("bundle " + path.string() + ": " + e.what());
  }
}

TomographyBundle read_records_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  boost::trim(line);
  if (line != "qwp_a,hwp_a,qwp_b,hwp_b,raw,accidental,duration") {
    throw ConfigError(path.string() + ": expected header qwp_a,hwp_a,qwp_b,hwp_b,raw,accidental,duration");
  }
  std::vector<SettingPair> settings;
  std::vector<CoincidenceRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    boost::trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    boost::split(cells, line, boost::is_any_of(","));
    if (cells.size() != 7) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": need 7 columns");
    double v[7];
    for (int k = 0; k < 7; ++k) {
      try {
        std::size_t pos = 0;
        v[k] = std::stod(boost::trim_copy(cells[static_cast<std::size_t>(k)]), &pos);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + cells[k] + "'");
      }
    }
    settings.push_back({{v[0], v[1]}, {v[2], v[3]}, "row " + std::to_string(line_no)});
    records.push_back({records.size(), v[4], v[5], v[6]});
  }
  if (settings.empty()) throw ConfigError(path.string() + ": no records");
  return {TomographyProtocol(std::move(settings)), std::move(records)};
}

Json write_run(const RunResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  Json files = {{"global", Json::object()}, {"pumps", Json::object()}};
  for (const PumpResult& p : r.pumps) {
    const std::string tag = file_label(p.pump.label);
    Json pf;
    if (!r.config.counting.noiseless) {
      pf["histogram"] = "histogram_" + tag + ".csv";
      write_histogram_csv(p.first_histogram, dir / pf["histogram"].get<std::string>());
    }
    pf["fringes"] = "fringes_" + tag + ".csv";
    write_fringe_csv(p.fringes, dir / pf["fringes"].get<std::string>());
    pf["bundle"] = "bundle_" + tag + ".json";
    std::ofstream bundle(dir / pf["bundle"].get<std::string>());
    bundle << bundle_to_json({r.config.protocol, p.records}).dump(2) << '\n';
    files["pumps"][p.pump.label] = pf;
  }
  files["global"] = {{"spectrum", "spectrum.csv"},
                     {"hom_dip", "hom_dip.csv"},
                     {"hom_peak", "hom_peak.csv"},
                     {"delay_scan", "delay_scan.csv"}};
  write_spectrum_csv(r.hom.spectrum, dir / "spectrum.csv");
  write_hom_csv(r.hom.dip, dir / "hom_dip.csv");
  write_hom_csv(r.hom.peak, dir / "hom_peak.csv");
  write_delay_csv(r.delay_line, dir / "delay_scan.csv");

  Json report = as_json(r, files);
  auto out = open_out(dir / "report.json");
  out << report.dump(2) << '\n';
  return report;
}

}  // namespace qfilm
