#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qfilm/jones.hpp"
#include "qfilm/qutrit_state.hpp"

namespace qfilm {

struct SettingPair {
  AnalyzerSetting a;
  AnalyzerSetting b;
  std::string label;  // e.g. "D,H"; informational only
};

class TomographyProtocol {
 public:
  explicit TomographyProtocol(std::vector<SettingPair> settings);

  // (H,H) (H,V) (V,V) (D,H) (D,V) (D,D) (R,H) (R,V) (R,D)
  static TomographyProtocol default_nine();
  // Builds a protocol from pairs of cardinal state names.
  static TomographyProtocol from_names(const std::vector<std::pair<std::string, std::string>>& names);

  const std::vector<SettingPair>& settings() const { return settings_; }
  std::size_t size() const { return settings_.size(); }

 private:
  std::vector<SettingPair> settings_;
};

struct CoincidenceRecord {
  std::size_t setting_index = 0;
  double raw_coincidences = 0.0;
  double accidental_estimate = 0.0;
  double duration_s = 1.0;

  // Background-subtracted; may be slightly negative and is not clipped.
  double net_coincidences() const { return raw_coincidences - accidental_estimate; }
  double net_rate() const { return net_coincidences() / duration_s; }
};

// Checks raw >= 0 and duration > 0.
void validate(const CoincidenceRecord& record);

// Coincidence amplitude vector for analyzer kets xi (arm A) and eta (arm B):
// w = (sqrt2 xi_H eta_H, xi_H eta_V + xi_V eta_H, sqrt2 xi_V eta_V), so that
// the coincidence rate is proportional to <w|rho|w>. <w|rho|w> is twice the
// probability of the (xi, eta) coincidence behind the splitter.
CVec3 projector_vector(const PolarizationKet& ket_a, const PolarizationKet& ket_b);
CVec3 projector_vector(const SettingPair& setting);

// Real 9-vector x(M) with <w|M|w> = a(w) . x(M) for Hermitian M:
// x = (M00, M11, M22, Re M01, Im M01, Re M02, Im M02, Re M12, Im M12).
Eigen::Matrix<double, 9, 1> hermitian_coordinates(const CMat3& m);
CMat3 from_hermitian_coordinates(const Eigen::Matrix<double, 9, 1>& x);
Eigen::Matrix<double, 9, 1> measurement_row(const CVec3& w);

struct Completeness {
  bool complete;
  int rank;
};

// Rank of the stacked flattened projectors |w_m><w_m|; complete iff rank 9.
Completeness completeness_check(const TomographyProtocol& protocol);

// r_m = scale * <w_m|rho|w_m>
std::vector<double> forward_rates(const QutritDensityMatrix& rho, const TomographyProtocol& protocol,
                                  double scale);

struct FitReport {
  std::vector<double> residuals;     // measured - fitted rate, per setting
  double weighted_chi2 = 0.0;        // sum of residual^2 / max(fitted, 1)
  double scale = 0.0;                // fitted rate scale (trace of the raw fit)
  double negative_eigen_mass = 0.0;  // sum of |negative eigenvalues| before projection
  CMat3 unconstrained;               // unit-trace Hermitian fit before projection
};

struct Reconstruction {
  QutritDensityMatrix rho;
  FitReport report;
};

// Nearest (Frobenius) unit-trace PSD matrix: normalize the trace, clip
// negative eigenvalues and share the clipped mass over the remaining ones.
// Throws SingularFit for a non-positive trace.
CMat3 project_psd(const CMat3& m);

// Least-squares fit of scale * <w_m|M|w_m> to the net rates with
// trace(M) = 1, followed by project_psd. The fit report's chi^2 uses
// Poisson-like weights 1/max(fitted rate, 1).
// Throws IncompleteProtocol, SingularFit, PreconditionError (misaligned records).
Reconstruction reconstruct(const std::vector<CoincidenceRecord>& records,
                           const TomographyProtocol& protocol);

// Reconstruction directly from rates (one per protocol setting).
Reconstruction reconstruct_from_rates(const std::vector<double>& rates,
                                      const TomographyProtocol& protocol);

enum class FixedAnalyzer { H, V, D, A };
FixedAnalyzer fixed_analyzer_from_name(const std::string& name);
PolarizationKet fixed_analyzer_ket(FixedAnalyzer b);

struct FringeFit {
  double offset = 0.0;                     // a
  double cos2 = 0.0, sin2 = 0.0;           // second harmonic
  double cos4 = 0.0, sin4 = 0.0;           // fourth harmonic
  double evaluate(double theta_deg) const;
};

struct FringeScan {
  std::vector<double> theta_deg;
  std::vector<double> rates;
  FringeFit fit;
  double visibility = 0.0;
  double theta_min_deg = 0.0;  // location of the fitted minimum
  double theta_max_deg = 0.0;
};

// Arm A selects linear polarization at each theta, arm B is fixed.
// Throws PreconditionError when the grid spans less than 180 deg and
// FitFailure when the harmonic fit is singular or non-positive.
FringeScan fringe_scan(const QutritDensityMatrix& rho, FixedAnalyzer fixed_b,
                       const std::vector<double>& theta_grid_deg);

// Harmonic fit a + sum_{n=2,4} (c_n cos n theta + s_n sin n theta) and the
// visibility (max - min)/(max + min) of the fitted curve.
FringeScan fit_fringe(const std::vector<double>& theta_deg, const std::vector<double>& rates);

}  // namespace qfilm
