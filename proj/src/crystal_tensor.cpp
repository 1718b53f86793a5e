#include "qfilm/crystal_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qfilm/errors.hpp"

namespace qfilm {

Chi2Tensor::Chi2Tensor(double d_pm_per_v) : d_(d_pm_per_v) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        chi_[i][j][k] = (i != j && j != k && i != k) ? d_ : 0.0;
}

Complex Chi2Tensor::contract(const CVec3& a, const CVec3& b, const CVec3& c) const {
  Complex sum = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        if (chi_[i][j][k] != 0.0) sum += chi_[i][j][k] * a(i) * b(j) * c(k);
  return sum;
}

Mat3 rotation_matrix(const CrystalOrientation& o) {
  const double t = deg_to_rad(o.tilt_deg);
  const double a = deg_to_rad(o.azimuth_deg);
  Mat3 ry;
  ry << std::cos(t), 0.0, std::sin(t),
        0.0, 1.0, 0.0,
        -std::sin(t), 0.0, std::cos(t);
  Mat3 rz;
  rz << std::cos(a), -std::sin(a), 0.0,
        std::sin(a), std::cos(a), 0.0,
        0.0, 0.0, 1.0;
  return rz * ry;
}

Mat3 lab_to_crystal(const CrystalOrientation& o) {
  // crystal (x, y, z) = reference-pose lab (z, x, y)
  Mat3 relabel;
  relabel << 0.0, 0.0, 1.0,
             1.0, 0.0, 0.0,
             0.0, 1.0, 0.0;
  return relabel * rotation_matrix(o);
}

PairAmplitudes pair_amplitudes(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                               const PolarizationKet& pump) {
  const Eigen::Matrix3cd m = lab_to_crystal(orientation).cast<Complex>();
  const CVec3 h = m * CVec3(1.0, 0.0, 0.0);
  const CVec3 v = m * CVec3(0.0, 1.0, 0.0);
  const CVec3 p = m * CVec3(pump.h(), pump.v(), 0.0);
  return {chi.contract(h, h, p), chi.contract(h, v, p), chi.contract(v, h, p), chi.contract(v, v, p)};
}

namespace {

double rate_of(const PairAmplitudes& a) {
  const Complex c2 = (a.hv + a.vh) * kInvSqrt2;
  return std::norm(a.hh) + std::norm(c2) + std::norm(a.vv);
}

}  // namespace

double reference_max_rate(const Chi2Tensor& chi, const CrystalOrientation& orientation) {
  double best = 0.0;
  for (int deg = 0; deg < 180; ++deg) {
    best = std::max(best, rate_of(pair_amplitudes(chi, orientation, PolarizationKet::linear(deg))));
  }
  return best;
}

SpdcResult spdc_amplitudes(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                           const PolarizationKet& pump, const SpdcOptions& options) {
  const PairAmplitudes a = pair_amplitudes(chi, orientation, pump);
  const CVec3 c(a.hh, (a.hv + a.vh) * kInvSqrt2, a.vv);
  const double rate = c.squaredNorm();

  double eps = options.zero_rate_epsilon;
  if (eps <= 0.0) eps = 1e-12 * reference_max_rate(chi, orientation);
  // A vanishing tensor has a zero reference scan; any rate is then "zero".
  if (!(rate > eps) || rate == 0.0) {
    std::ostringstream os;
    os << "relative rate " << rate << " below epsilon " << eps << " (tilt " << orientation.tilt_deg
       << " deg, azimuth " << orientation.azimuth_deg << " deg)";
    throw ZeroAmplitude(os.str());
  }
  return {QutritState::normalized(c), rate, a};
}

std::vector<RatePoint> pair_rate_curve(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                                       const std::vector<double>& pump_angles_deg) {
  if (pump_angles_deg.empty()) throw PreconditionError("pump angle grid is empty");
  const double eps = 1e-12 * reference_max_rate(chi, orientation);
  std::vector<RatePoint> out;
  out.reserve(pump_angles_deg.size());
  for (double ang : pump_angles_deg) {
    const auto r = spdc_amplitudes(chi, orientation, PolarizationKet::linear(ang), {eps});
    out.push_back({ang, r.relative_rate});
  }
  return out;
}

double weight_residual(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                       const std::vector<WeightTarget>& targets) {
  double res = 0.0;
  for (const auto& t : targets) {
    const PairAmplitudes a = pair_amplitudes(chi, orientation, t.pump);
    const CVec3 c(a.hh, (a.hv + a.vh) * kInvSqrt2, a.vv);
    const double rate = c.squaredNorm();
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    res += (c.cwiseAbs2() / rate - t.weights).squaredNorm();
  }
  return res;
}

CalibrationResult calibrate_azimuth(const Chi2Tensor& chi, double tilt_deg,
                                    const std::vector<WeightTarget>& targets,
                                    const CalibrationOptions& options) {
  if (targets.empty()) throw PreconditionError("calibration needs at least one weight target");
  if (!(options.step_deg > 0.0) || !(options.stop_deg > options.start_deg)) {
    throw PreconditionError("invalid azimuth grid");
  }
  const auto n = static_cast<long>(std::ceil((options.stop_deg - options.start_deg) / options.step_deg - 1e-9));
  CalibrationResult best{options.start_deg, std::numeric_limits<double>::infinity(), 0.0};
  for (long i = 0; i < n; ++i) {
    const double az = options.start_deg + static_cast<double>(i) * options.step_deg;
    const double r = weight_residual(chi, {tilt_deg, az}, targets);
    if (r < best.residual) {
      best.residual = r;
      best.azimuth_deg = az;
    }
  }
  best.rms_deviation = std::sqrt(best.residual / (3.0 * static_cast<double>(targets.size())));
  if (!(best.rms_deviation <= options.max_rms_deviation)) {
    std::ostringstream os;
    os << "best azimuth " << best.azimuth_deg << " deg leaves RMS weight deviation "
       << best.rms_deviation << " > " << options.max_rms_deviation;
    throw PoorFit(os.str());
  }
  return best;
}

}  // namespace qfilm
