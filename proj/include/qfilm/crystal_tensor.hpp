#pragma once

#include <array>
#include <vector>

#include "qfilm/qutrit_state.hpp"
#include "qfilm/types.hpp"

namespace qfilm {

// Second-order susceptibility of a zinc-blende crystal (point group -43m):
// chi[i][j][k] = d for (i,j,k) a permutation of (x,y,z), zero otherwise.
class Chi2Tensor {
 public:
  using Array = std::array<std::array<std::array<double, 3>, 3>, 3>;

  explicit Chi2Tensor(double d_pm_per_v);
  static Chi2Tensor zinc_blende(double d_pm_per_v) { return Chi2Tensor(d_pm_per_v); }

  double d() const { return d_; }
  double operator()(int i, int j, int k) const { return chi_[i][j][k]; }
  const Array& elements() const { return chi_; }

  // sum_ijk chi[i][j][k] a_i b_j c_k
  Complex contract(const CVec3& a, const CVec3& b, const CVec3& c) const;

 private:
  double d_;
  Array chi_{};
};

// Orientation of the crystal relative to the lab frame.
//
// Lab frame: z is the film normal and the (collinear) propagation axis,
// x = H and y = V. In the reference pose the crystal [100] axis lies along
// lab z, [010] along lab x and [001] along lab y. The orientation rotates
// lab-frame vectors first about lab y by `tilt_deg`, then about lab z by
// `azimuth_deg`; the result is expressed in crystal axes by the fixed
// reference relabelling. At tilt = 15 deg the film normal sits 15 deg from [100].
struct CrystalOrientation {
  double tilt_deg = 0.0;
  double azimuth_deg = 0.0;
};

// Proper rotation Rz(azimuth) * Ry(tilt); identity at (0, 0).
Mat3 rotation_matrix(const CrystalOrientation& orientation);

// Maps lab-frame vectors to crystal (x, y, z) coordinates:
// reference relabelling applied after rotation_matrix.
Mat3 lab_to_crystal(const CrystalOrientation& orientation);

// The four tensor contractions A_ab = chi . (R e_a)(R e_b)(R e_p), a,b in {H,V}.
struct PairAmplitudes {
  Complex hh, hv, vh, vv;
};

PairAmplitudes pair_amplitudes(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                               const PolarizationKet& pump);

struct SpdcResult {
  QutritState state;
  double relative_rate;  // |c1|^2 + |c2|^2 + |c3|^2 before normalization
  PairAmplitudes raw;
};

struct SpdcOptions {
  // Absolute floor on the relative rate below which no pairs are produced.
  // Defaults to 1e-12 of the largest rate over a reference pump scan of the
  // given tensor and orientation when left at zero.
  double zero_rate_epsilon = 0.0;
};

// Throws ZeroAmplitude when the pump/orientation combination emits no pairs.
SpdcResult spdc_amplitudes(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                           const PolarizationKet& pump, const SpdcOptions& options = {});

// Largest relative rate over linear pump angles 0..179 deg (1 deg steps).
double reference_max_rate(const Chi2Tensor& chi, const CrystalOrientation& orientation);

struct RatePoint {
  double pump_angle_deg;
  double relative_rate;
};

// Relative pair rate for a linear pump at each angle (degrees from H).
std::vector<RatePoint> pair_rate_curve(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                                       const std::vector<double>& pump_angles_deg);

struct WeightTarget {
  PolarizationKet pump;
  Eigen::Vector3d weights;  // target (|C1|^2, |C2|^2, |C3|^2)
};

struct CalibrationOptions {
  double step_deg = 0.1;
  double start_deg = 0.0;
  double stop_deg = 180.0;  // exclusive
  // Maximum allowed RMS deviation per weight before PoorFit is raised.
  double max_rms_deviation = 0.06;
};

struct CalibrationResult {
  double azimuth_deg;
  double residual;      // summed squared deviation over all targets
  double rms_deviation; // sqrt(residual / number of weights)
};

// Brute-force scan of the azimuth minimizing the joint weight residual.
// Throws PreconditionError for empty targets and PoorFit when the best
// RMS deviation exceeds options.max_rms_deviation.
CalibrationResult calibrate_azimuth(const Chi2Tensor& chi, double tilt_deg,
                                    const std::vector<WeightTarget>& targets,
                                    const CalibrationOptions& options = {});

// Residual of a single orientation against the targets (summed squares).
double weight_residual(const Chi2Tensor& chi, const CrystalOrientation& orientation,
                       const std::vector<WeightTarget>& targets);

}  // namespace qfilm
