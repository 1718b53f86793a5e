#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qfilm {

// Refractive index n(lambda) as a Sellmeier series
//   n^2 = a + sum_i b_i lambda^2 / (lambda^2 - l_i^2),   lambda, l_i in um,
// or a constant when no terms are given (n = sqrt(a)).
class IndexModel {
 public:
  struct Term {
    double b;
    double l_um;
  };

  IndexModel() = default;
  IndexModel(double a, std::vector<Term> terms, std::string source = {});
  static IndexModel constant(double n);

  double n(double wavelength_um) const;
  double n_at_thz(double frequency_thz) const;
  double group_index(double wavelength_um) const;

  const std::string& source() const { return source_; }

 private:
  double a_ = 1.0;
  std::vector<Term> terms_;
  std::string source_;
};

using MaterialTable = std::map<std::string, IndexModel>;

// Reads the INI materials file. Sections name materials; keys:
//   a = <double>          (or n = <double> for a constant index)
//   b1, l1, b2, l2, ...   Sellmeier terms
//   source = <text>       provenance note
// Throws ConfigError.
MaterialTable load_materials(const std::filesystem::path& path);

const IndexModel& lookup(const MaterialTable& table, const std::string& name);

double wavelength_um_from_thz(double frequency_thz);
double thz_from_wavelength_nm(double wavelength_nm);

}  // namespace qfilm
