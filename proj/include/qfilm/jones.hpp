#pragma once

#include <string_view>

#include "qfilm/types.hpp"

namespace qfilm {

// Jones calculus conventions, used everywhere in this library:
//  * basis (H, V); angles in degrees, measured counter-clockwise from H
//    looking into the beam;
//  * a retarder with fast axis at theta and retardance G is
//    R(theta) diag(1, e^{iG}) R(-theta), R the usual 2x2 rotation;
//  * QWP: G = pi/2, HWP: G = pi;
//  * R = (H + iV)/sqrt(2), L = (H - iV)/sqrt(2).

CMat2 rotation2(double theta_deg);
CMat2 retarder(double fast_axis_deg, double retardance_rad);
CMat2 quarter_wave_plate(double fast_axis_deg);
CMat2 half_wave_plate(double fast_axis_deg);

// One arm of the polarization analyzer: light passes the QWP, then the HWP,
// then a polarizer whose pass axis is H.
struct AnalyzerSetting {
  double qwp_deg = 0.0;
  double hwp_deg = 0.0;
};

// Input polarization transmitted with unit probability:
// (J_HWP(h) J_QWP(q))^dagger |H>.
PolarizationKet analyzer_ket(const AnalyzerSetting& setting);

// Wave-plate angles selecting one of the six cardinal states
// ("H", "V", "D", "A", "R", "L"). Throws PreconditionError otherwise.
AnalyzerSetting analyzer_for(std::string_view name);

// Wave-plate angles selecting linear polarization at theta.
AnalyzerSetting analyzer_for_linear(double theta_deg);

}  // namespace qfilm
