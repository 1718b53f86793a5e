#pragma once

#include <optional>
#include <vector>

#include "qfilm/types.hpp"

namespace qfilm {

// Two-photon polarization state in a single spatial/frequency mode.
// Basis order: |2>_H|0>_V, |1>_H|1>_V, |0>_H|2>_V  (written HH, HV-sym, VV).
class QutritState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  // Throws NotNormalized unless |c1|^2+|c2|^2+|c3|^2 = 1 within tolerance.
  QutritState(Complex c1, Complex c2, Complex c3);
  explicit QutritState(const CVec3& c) : QutritState(c(0), c(1), c(2)) {}

  // Rescales arbitrary non-zero amplitudes to unit norm.
  static QutritState normalized(const CVec3& c);

  static QutritState co_polarized_h() { return {1.0, 0.0, 0.0}; }
  static QutritState orthogonal_pair() { return {0.0, 1.0, 0.0}; }
  static QutritState co_polarized_v() { return {0.0, 0.0, 1.0}; }

  Complex c1() const { return c_(0); }
  Complex c2() const { return c_(1); }
  Complex c3() const { return c_(2); }
  const CVec3& amplitudes() const { return c_; }
  // (|c1|^2, |c2|^2, |c3|^2)
  Eigen::Vector3d weights() const { return c_.cwiseAbs2(); }

 private:
  CVec3 c_;
};

class QutritDensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-10;
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kEigenvalueFloor = -1e-9;

  // Throws InvalidDensityMatrix if rho is not Hermitian, unit-trace and PSD.
  explicit QutritDensityMatrix(const CMat3& rho);

  static QutritDensityMatrix pure(const QutritState& psi);
  static QutritDensityMatrix maximally_mixed();
  // p*rho + (1-p)*I/3
  static QutritDensityMatrix depolarized(const QutritDensityMatrix& rho, double p);

  const CMat3& matrix() const { return rho_; }
  Complex operator()(int i, int j) const { return rho_(i, j); }

 private:
  CMat3 rho_;
};

// |2 c1 c3 - c2^2|
double concurrence(const QutritState& psi);
// Same formula on raw amplitudes; throws NotNormalized when the norm is off.
double concurrence(const CVec3& amplitudes);

// K = 2/(2 - C^2). Throws OutOfRange outside [0, 1].
double schmidt_number(double concurrence);
// Inverse of schmidt_number: C = sqrt(2 - 2/K).
double concurrence_from_schmidt(double schmidt);

// Tr(rho^2)
double purity(const QutritDensityMatrix& rho);

struct DominantEigenstate {
  QutritState state;
  double eigenvalue;
};

// Eigenvector of the largest eigenvalue with its largest-magnitude component
// made real and positive. Throws DegenerateTop if the top two eigenvalues
// are closer than 1e-9.
DominantEigenstate dominant_eigenstate(const QutritDensityMatrix& rho);

// Concurrence of the pure state (sqrt(w1), sqrt(w2), sqrt(w3) e^{i phi}) for
// each phase phi (radians). Magnitude tables alone do not fix the concurrence
// when both c1 and c3 are populated.
std::vector<double> concurrence_vs_relative_phase(const Eigen::Vector3d& weights,
                                                  const std::vector<double>& phases_rad);

struct EntanglementSummary {
  double purity = 0.0;
  double top_eigenvalue = 0.0;
  // Empty when the top eigenvalue is degenerate.
  std::optional<double> concurrence;
  std::optional<double> schmidt_number;
  std::optional<QutritState> dominant;
  bool low_purity = false;  // purity < 0.9: pure-state measures are unreliable
};

EntanglementSummary summarize_entanglement(const QutritDensityMatrix& rho);

}  // namespace qfilm
