#include "qfilm/jones.hpp"

#include <cmath>
#include <string>

#include "qfilm/errors.hpp"

namespace qfilm {

PolarizationKet::PolarizationKet(Complex h, Complex v) : v_(h, v) {
  const double n = v_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw PreconditionError("zero or non-finite Jones vector");
  v_ /= n;
}

PolarizationKet PolarizationKet::linear(double theta_deg) {
  const double t = deg_to_rad(theta_deg);
  return {std::cos(t), std::sin(t)};
}

PolarizationKet PolarizationKet::with_phase(double phase_rad) const {
  return PolarizationKet(CVec2(v_ * std::polar(1.0, phase_rad)));
}

double fidelity(const PolarizationKet& a, const PolarizationKet& b) {
  return std::norm(a.vec().dot(b.vec()));  // Eigen's dot conjugates the first argument
}

CMat2 rotation2(double theta_deg) {
  const double t = deg_to_rad(theta_deg);
  CMat2 r;
  r << std::cos(t), -std::sin(t),
       std::sin(t), std::cos(t);
  return r;
}

CMat2 retarder(double fast_axis_deg, double retardance_rad) {
  CMat2 d = CMat2::Zero();
  d(0, 0) = 1.0;
  d(1, 1) = std::polar(1.0, retardance_rad);
  return rotation2(fast_axis_deg) * d * rotation2(-fast_axis_deg);
}

CMat2 quarter_wave_plate(double fast_axis_deg) { return retarder(fast_axis_deg, kPi / 2.0); }
CMat2 half_wave_plate(double fast_axis_deg) { return retarder(fast_axis_deg, kPi); }

PolarizationKet analyzer_ket(const AnalyzerSetting& s) {
  const CMat2 chain = half_wave_plate(s.hwp_deg) * quarter_wave_plate(s.qwp_deg);
  return PolarizationKet(CVec2(chain.adjoint() * CVec2(1.0, 0.0)));
}

AnalyzerSetting analyzer_for_linear(double theta_deg) {
  // QWP along the polarization leaves it linear; the HWP then rotates it onto H.
  return {theta_deg, theta_deg / 2.0};
}

AnalyzerSetting analyzer_for(std::string_view name) {
  if (name == "H") return {0.0, 0.0};
  if (name == "V") return {0.0, 45.0};
  if (name == "D") return {45.0, 22.5};
  if (name == "A") return {-45.0, -22.5};
  if (name == "R") return {0.0, -22.5};
  if (name == "L") return {0.0, 22.5};
  throw PreconditionError("unknown analyzer state '" + std::string(name) + "'");
}

}  // namespace qfilm
