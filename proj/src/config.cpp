#include "qfilm/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qfilm/errors.hpp"

namespace qfilm {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"crystal", {"d_pm_per_v", "tilt_deg", "azimuth_deg", "calibration_step_deg", "max_rms_deviation", "targets"}},
      {"pump", {"settings", "power_mw", "wavelength_nm"}},
      {"state", {"purity_weight"}},
      {"tomography", {"protocol", "duration_s"}},
      {"fringe", {"fixed", "step_deg"}},
      {"counting",
       {"noiseless", "pair_rate", "background_singles_a", "background_singles_b", "heralding_efficiency",
        "peak_efficiency", "bin_width_ns", "bins", "exclusion_half_width", "bell_duration_s",
        "bootstrap_samples"}},
      {"spectrum",
       {"materials_file", "film", "substrate", "ambient", "thickness_nm", "longpass_cut_on_nm",
        "grid_half_width_thz", "grid_points", "detector_response_fwhm_thz", "delay_min_fs", "delay_max_fs",
        "delay_step_fs", "fit_window_fs"}},
      {"delay_line",
       {"plate_thickness_mm", "base_tilt_deg", "ordinary", "extraordinary", "wavelength_nm", "scan_min_deg",
        "scan_max_deg", "scan_step_deg"}},
      {"filter", {"bandpass_center_nm", "bandpass_fwhm_nm"}},
      {"run", {"seed"}},
  };
  return keys;
}

std::vector<std::string> split_list(const std::string& text, const char* separators) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(separators));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double to_double(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!tree_) return fallback;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return fallback;
    try {
      return boost::lexical_cast<T>(boost::trim_copy(*v));
    } catch (const boost::bad_lexical_cast&) {
      throw ConfigError("[" + name_ + "] " + key + ": cannot parse '" + *v + "'");
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return boost::trim_copy(*v);
  }

  const std::string& name() const { return name_; }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

bool to_bool(const std::string& text, const std::string& where) {
  const std::string t = boost::to_lower_copy(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(where + ": expected a boolean, got '" + text + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

PumpSetting parse_pump(const std::string& text) {
  const std::string t = boost::trim_copy(text);
  if (t == "H") return {"H", 0.0};
  if (t == "V") return {"V", 90.0};
  if (t == "D") return {"D", 45.0};
  if (t == "A") return {"A", 135.0};
  const double angle = to_double(t, "pump polarization");
  return {t, angle};
}

std::filesystem::path default_materials_path() {
  return std::filesystem::path(QFILM_SOURCE_DIR) / "data" / "materials.ini";
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [name, section] : tree) {
    auto it = known_keys().find(name);
    if (it == known_keys().end()) {
      if (section.empty() && !section.data().empty()) throw ConfigError("key '" + name + "' outside any section");
      throw ConfigError("unknown section [" + name + "]");
    }
    for (const auto& [key, value] : section) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    }
  }
  const auto section = [&](const std::string& name) {
    auto child = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
    return Section(child ? &*child : nullptr, name);
  };

  ExperimentConfig cfg;

  const Section crystal = section("crystal");
  cfg.crystal.d_pm_per_v = crystal.get("d_pm_per_v", 100.0);
  cfg.crystal.tilt_deg = crystal.get("tilt_deg", 15.0);
  if (auto az = crystal.text("azimuth_deg"); az && *az != "auto") {
    cfg.crystal.azimuth_deg = to_double(*az, "[crystal] azimuth_deg");
  }
  cfg.crystal.calibration.step_deg = crystal.get("calibration_step_deg", 0.1);
  cfg.crystal.calibration.max_rms_deviation = crystal.get("max_rms_deviation", 0.06);
  const std::string targets = crystal.text("targets").value_or("H: 0.79 0.00 0.21; V: 0.03 0.97 0.00");
  for (const auto& entry : split_list(targets, ";")) {
    const auto colon = entry.find(':');
    require(colon != std::string::npos, "[crystal] targets: expected '<pump>: w1 w2 w3', got '" + entry + "'");
    const auto values = split_list(entry.substr(colon + 1), " \t,");
    require(values.size() == 3, "[crystal] targets: need three weights for '" + entry + "'");
    Eigen::Vector3d w;
    for (int i = 0; i < 3; ++i) w(i) = to_double(values[static_cast<std::size_t>(i)], "[crystal] targets");
    cfg.crystal.targets.emplace_back(parse_pump(entry.substr(0, colon)), w);
  }
  require(cfg.crystal.d_pm_per_v >= 0.0, "[crystal] d_pm_per_v must be >= 0");

  const Section pump = section("pump");
  for (const auto& p : split_list(pump.text("settings").value_or("H, V"), ",")) cfg.pumps.push_back(parse_pump(p));
  require(!cfg.pumps.empty(), "[pump] settings is empty");
  cfg.pump_power_mw = pump.get("power_mw", 60.0);
  cfg.spectrum.pump_wavelength_nm = pump.get("wavelength_nm", 638.0);

  cfg.state_purity_weight = section("state").get("purity_weight", 1.0);
  require(cfg.state_purity_weight >= 0.0 && cfg.state_purity_weight <= 1.0, "[state] purity_weight must be in [0,1]");

  const Section tomo = section("tomography");
  const std::string protocol = tomo.text("protocol").value_or("default");
  if (protocol != "default") {
    std::vector<std::pair<std::string, std::string>> names;
    for (const auto& pair : split_list(protocol, ";")) {
      const auto ab = split_list(pair, ",");
      require(ab.size() == 2, "[tomography] protocol: expected 'A,B' pairs, got '" + pair + "'");
      names.emplace_back(ab[0], ab[1]);
    }
    try {
      cfg.protocol = TomographyProtocol::from_names(names);
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("[tomography] protocol: ") + e.what());
    }
  }
  cfg.counting.tomography_duration_s = tomo.get("duration_s", 60.0);

  const Section fringe = section("fringe");
  if (auto fixed = fringe.text("fixed")) {
    cfg.fringe_analyzers.clear();
    for (const auto& f : split_list(*fixed, ",")) {
      try {
        cfg.fringe_analyzers.push_back(fixed_analyzer_from_name(f));
      } catch (const PreconditionError& e) {
        throw ConfigError(std::string("[fringe] fixed: ") + e.what());
      }
    }
  }
  cfg.fringe_step_deg = fringe.get("step_deg", 2.0);
  require(cfg.fringe_step_deg > 0.0 && cfg.fringe_step_deg <= 30.0, "[fringe] step_deg must be in (0, 30]");

  const Section counting = section("counting");
  auto& c = cfg.counting;
  if (auto n = counting.text("noiseless")) c.noiseless = to_bool(*n, "[counting] noiseless");
  c.pair_rate = counting.get("pair_rate", c.pair_rate);
  c.background_singles_a = counting.get("background_singles_a", c.background_singles_a);
  c.background_singles_b = counting.get("background_singles_b", c.background_singles_b);
  c.heralding_efficiency = counting.get("heralding_efficiency", c.heralding_efficiency);
  c.peak_efficiency = counting.get("peak_efficiency", c.peak_efficiency);
  c.bin_width_ns = counting.get("bin_width_ns", c.bin_width_ns);
  c.bins = counting.get("bins", c.bins);
  c.exclusion_half_width = counting.get("exclusion_half_width", c.exclusion_half_width);
  c.bell_duration_s = counting.get("bell_duration_s", c.bell_duration_s);
  c.bootstrap_samples = counting.get("bootstrap_samples", c.bootstrap_samples);
  require(c.pair_rate >= 0.0, "[counting] pair_rate must be >= 0");
  require(c.background_singles_a >= 0.0 && c.background_singles_b >= 0.0, "[counting] singles rates must be >= 0");
  require(c.heralding_efficiency > 0.0 && c.heralding_efficiency <= 1.0, "[counting] heralding_efficiency in (0,1]");
  require(c.peak_efficiency >= 0.0 && c.peak_efficiency <= 1.0, "[counting] peak_efficiency in [0,1]");
  require(c.bin_width_ns > 0.0, "[counting] bin_width_ns must be > 0");
  require(c.bins >= 21 && c.bins % 2 == 1, "[counting] bins must be odd and >= 21");
  require(c.exclusion_half_width >= 0, "[counting] exclusion_half_width must be >= 0");
  require(c.tomography_duration_s > 0.0 && c.bell_duration_s > 0.0, "durations must be > 0");
  require(c.bootstrap_samples >= 0, "[counting] bootstrap_samples must be >= 0");

  const Section spectrum = section("spectrum");
  auto& s = cfg.spectrum;
  if (auto mf = spectrum.text("materials_file")) {
    s.materials_file = std::filesystem::path(*mf).is_absolute() ? std::filesystem::path(*mf) : base_dir / *mf;
  } else {
    s.materials_file = default_materials_path();
  }
  s.film = spectrum.text("film").value_or(s.film);
  s.substrate = spectrum.text("substrate").value_or(s.substrate);
  s.ambient = spectrum.text("ambient").value_or(s.ambient);
  s.thickness_nm = spectrum.get("thickness_nm", s.thickness_nm);
  s.longpass_cut_on_nm = spectrum.get("longpass_cut_on_nm", s.longpass_cut_on_nm);
  s.grid.half_width_thz = spectrum.get("grid_half_width_thz", s.grid.half_width_thz);
  s.grid.points = spectrum.get("grid_points", s.grid.points);
  s.detector_response_fwhm_thz = spectrum.get("detector_response_fwhm_thz", s.detector_response_fwhm_thz);
  s.delay_min_fs = spectrum.get("delay_min_fs", s.delay_min_fs);
  s.delay_max_fs = spectrum.get("delay_max_fs", s.delay_max_fs);
  s.delay_step_fs = spectrum.get("delay_step_fs", s.delay_step_fs);
  s.fit_window_fs = spectrum.get("fit_window_fs", s.fit_window_fs);
  require(s.thickness_nm > 0.0, "[spectrum] thickness_nm must be > 0");
  require(s.pump_wavelength_nm > 0.0, "[pump] wavelength_nm must be > 0");
  require(s.grid.points >= 3, "[spectrum] grid_points must be >= 3");
  require(s.detector_response_fwhm_thz >= 0.0, "[spectrum] detector_response_fwhm_thz must be >= 0");
  require(s.delay_step_fs > 0.0 && s.delay_max_fs > s.delay_min_fs, "[spectrum] invalid delay range");
  require(s.fit_window_fs > 0.0, "[spectrum] fit_window_fs must be > 0");

  const Section dl = section("delay_line");
  auto& d = cfg.delay_line;
  d.plate_thickness_mm = dl.get("plate_thickness_mm", d.plate_thickness_mm);
  d.base_tilt_deg = dl.get("base_tilt_deg", d.base_tilt_deg);
  d.ordinary = dl.text("ordinary").value_or(d.ordinary);
  d.extraordinary = dl.text("extraordinary").value_or(d.extraordinary);
  d.wavelength_nm = dl.get("wavelength_nm", d.wavelength_nm);
  d.scan_min_deg = dl.get("scan_min_deg", d.scan_min_deg);
  d.scan_max_deg = dl.get("scan_max_deg", d.scan_max_deg);
  d.scan_step_deg = dl.get("scan_step_deg", d.scan_step_deg);
  require(d.plate_thickness_mm > 0.0, "[delay_line] plate_thickness_mm must be > 0");
  require(std::abs(d.base_tilt_deg) < 60.0, "[delay_line] |base_tilt_deg| must be < 60");
  require(d.scan_step_deg > 0.0 && d.scan_max_deg >= d.scan_min_deg, "[delay_line] invalid scan range");
  require(std::abs(d.scan_min_deg) < 60.0 && std::abs(d.scan_max_deg) < 60.0, "[delay_line] scan tilts must be < 60");

  const Section filter = section("filter");
  cfg.bandpass_center_nm = filter.get("bandpass_center_nm", cfg.bandpass_center_nm);
  cfg.bandpass_fwhm_nm = filter.get("bandpass_fwhm_nm", cfg.bandpass_fwhm_nm);

  cfg.seed = section("run").get<std::uint64_t>("seed", 1);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str(), path.parent_path());
  cfg.source = path;
  return cfg;
}

std::filesystem::path materials_path(const SpectrumConfig& cfg) {
  return cfg.materials_file.empty() ? default_materials_path() : cfg.materials_file;
}

FilmStack make_film_stack(const SpectrumConfig& cfg) {
  const MaterialTable materials = load_materials(materials_path(cfg));
  FilmStack stack;
  stack.thickness_nm = cfg.thickness_nm;
  stack.pump_wavelength_nm = cfg.pump_wavelength_nm;
  stack.film = lookup(materials, cfg.film);
  stack.substrate = lookup(materials, cfg.substrate);
  stack.ambient = lookup(materials, cfg.ambient);
  stack.longpass_cut_on_nm = cfg.longpass_cut_on_nm;
  return stack;
}

DelayLine make_delay_line(const DelayLineConfig& cfg, const MaterialTable& materials) {
  const double lambda_um = cfg.wavelength_nm * 1e-3;
  return four_plate_line(cfg.plate_thickness_mm, cfg.base_tilt_deg, lookup(materials, cfg.ordinary).n(lambda_um),
                         lookup(materials, cfg.extraordinary).n(lambda_um));
}

}  // namespace qfilm
