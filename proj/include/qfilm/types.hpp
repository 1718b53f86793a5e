#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace qfilm {

using Complex = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using CVec2 = Eigen::Vector2cd;
using CVec3 = Eigen::Vector3cd;
using CVec4 = Eigen::Vector4cd;
using CMat2 = Eigen::Matrix2cd;
using CMat3 = Eigen::Matrix3cd;
using CMat4 = Eigen::Matrix4cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Jones vector (e_H, e_V) in the lab frame, normalized to unit length.
class PolarizationKet {
 public:
  PolarizationKet(Complex h, Complex v);
  explicit PolarizationKet(const CVec2& v) : PolarizationKet(v(0), v(1)) {}

  static PolarizationKet horizontal() { return {1.0, 0.0}; }
  static PolarizationKet vertical() { return {0.0, 1.0}; }
  static PolarizationKet diagonal() { return {kInvSqrt2, kInvSqrt2}; }
  static PolarizationKet antidiagonal() { return {kInvSqrt2, -kInvSqrt2}; }
  // R = (H + iV)/sqrt(2), the +1 eigenvector of S3.
  static PolarizationKet right_circular() { return {kInvSqrt2, Complex(0.0, kInvSqrt2)}; }
  static PolarizationKet left_circular() { return {kInvSqrt2, Complex(0.0, -kInvSqrt2)}; }
  // Linear polarization at angle theta (degrees) counter-clockwise from H.
  static PolarizationKet linear(double theta_deg);

  Complex h() const { return v_(0); }
  Complex v() const { return v_(1); }
  const CVec2& vec() const { return v_; }

  PolarizationKet with_phase(double phase_rad) const;

 private:
  CVec2 v_;
};

// |<a|b>|^2, a phase-insensitive overlap.
double fidelity(const PolarizationKet& a, const PolarizationKet& b);

}  // namespace qfilm
