#include "qfilm/materials.hpp"

#include <cmath>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qfilm/errors.hpp"
#include "qfilm/types.hpp"

namespace qfilm {

IndexModel::IndexModel(double a, std::vector<Term> terms, std::string source)
    : a_(a), terms_(std::move(terms)), source_(std::move(source)) {}

IndexModel IndexModel::constant(double n) { return IndexModel(n * n, {}, "constant"); }

double IndexModel::n(double wavelength_um) const {
  const double l2 = wavelength_um * wavelength_um;
  double n2 = a_;
  for (const auto& t : terms_) n2 += t.b * l2 / (l2 - t.l_um * t.l_um);
  if (!(n2 > 0.0)) throw OutOfRange("Sellmeier model gives n^2 <= 0 at " + std::to_string(wavelength_um) + " um");
  return std::sqrt(n2);
}

double IndexModel::n_at_thz(double frequency_thz) const { return n(wavelength_um_from_thz(frequency_thz)); }

double IndexModel::group_index(double wavelength_um) const {
  const double h = 1e-4 * wavelength_um;
  const double dn = (n(wavelength_um + h) - n(wavelength_um - h)) / (2.0 * h);
  return n(wavelength_um) - wavelength_um * dn;
}

double wavelength_um_from_thz(double frequency_thz) { return kSpeedOfLight / (frequency_thz * 1e12) * 1e6; }
double thz_from_wavelength_nm(double wavelength_nm) { return kSpeedOfLight / (wavelength_nm * 1e-9) * 1e-12; }

MaterialTable load_materials(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("materials file " + path.string() + ": " + e.message());
  }
  MaterialTable table;
  for (const auto& [name, section] : tree) {
    try {
      const std::string source = section.get<std::string>("source", "");
      if (auto n = section.get_optional<double>("n")) {
        table[name] = IndexModel(*n * *n, {}, source);
        continue;
      }
      const double a = section.get<double>("a");
      std::vector<IndexModel::Term> terms;
      for (int i = 1;; ++i) {
        auto b = section.get_optional<double>("b" + std::to_string(i));
        if (!b) break;
        terms.push_back({*b, section.get<double>("l" + std::to_string(i))});
      }
      table[name] = IndexModel(a, std::move(terms), source);
    } catch (const pt::ptree_error& e) {
      throw ConfigError("materials file " + path.string() + ", section [" + name + "]: " + e.what());
    }
  }
  return table;
}

const IndexModel& lookup(const MaterialTable& table, const std::string& name) {
  auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown material '" + name + "'");
  return it->second;
}

}  // namespace qfilm
