#include "qfilm/qutrit_state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qfilm/errors.hpp"

namespace qfilm {

namespace {

void check_norm(const CVec3& c) {
  const double n = c.squaredNorm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > QutritState::kNormTolerance) {
    std::ostringstream os;
    os << "sum |c_i|^2 = " << n;
    throw NotNormalized(os.str());
  }
}

}  // namespace

QutritState::QutritState(Complex c1, Complex c2, Complex c3) : c_(c1, c2, c3) { check_norm(c_); }

QutritState QutritState::normalized(const CVec3& c) {
  const double n = c.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NotNormalized("cannot normalize a zero vector");
  return QutritState(c / n);
}

QutritDensityMatrix::QutritDensityMatrix(const CMat3& rho) : rho_(rho) {
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kHermitianTolerance)) {
    throw InvalidDensityMatrix("not Hermitian (max |rho - rho^dag| = " + std::to_string(herm) + ")");
  }
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    throw InvalidDensityMatrix("trace = " + std::to_string(tr.real()));
  }
  // Symmetrize so downstream eigen-solvers see an exactly Hermitian matrix.
  rho_ = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat3> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenvalueFloor) {
    throw InvalidDensityMatrix("negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  }
}

QutritDensityMatrix QutritDensityMatrix::pure(const QutritState& psi) {
  return QutritDensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

QutritDensityMatrix QutritDensityMatrix::maximally_mixed() {
  return QutritDensityMatrix(CMat3::Identity() / 3.0);
}

QutritDensityMatrix QutritDensityMatrix::depolarized(const QutritDensityMatrix& rho, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange("depolarization weight must be in [0,1]");
  return QutritDensityMatrix(p * rho.matrix() + (1.0 - p) * CMat3::Identity() / 3.0);
}

double concurrence(const QutritState& psi) {
  return std::abs(2.0 * psi.c1() * psi.c3() - psi.c2() * psi.c2());
}

double concurrence(const CVec3& amplitudes) { return concurrence(QutritState(amplitudes)); }

double schmidt_number(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw OutOfRange("concurrence " + std::to_string(c) + " outside [0,1]");
  return 2.0 / (2.0 - c * c);
}

double concurrence_from_schmidt(double k) {
  if (!(k >= 1.0 && k <= 2.0)) throw OutOfRange("Schmidt number " + std::to_string(k) + " outside [1,2]");
  return std::sqrt(std::max(0.0, 2.0 - 2.0 / k));
}

double purity(const QutritDensityMatrix& rho) {
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return rho.matrix().cwiseAbs2().sum();
}

DominantEigenstate dominant_eigenstate(const QutritDensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMat3> es(rho.matrix());
  const auto& evals = es.eigenvalues();  // ascending
  if (evals(2) - evals(1) < 1e-9) {
    throw DegenerateTop("top eigenvalues " + std::to_string(evals(2)) + " and " +
                        std::to_string(evals(1)) + " coincide");
  }
  CVec3 v = es.eigenvectors().col(2);
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::polar(1.0, -std::arg(v(imax)));
  v(imax) = std::abs(v(imax));
  return {QutritState::normalized(v), evals(2)};
}

std::vector<double> concurrence_vs_relative_phase(const Eigen::Vector3d& weights,
                                                  const std::vector<double>& phases_rad) {
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw NotNormalized("weights must be non-negative and sum to 1");
  }
  std::vector<double> out;
  out.reserve(phases_rad.size());
  for (double phi : phases_rad) {
    const CVec3 c(std::sqrt(weights(0)), std::sqrt(weights(1)), std::polar(std::sqrt(weights(2)), phi));
    out.push_back(concurrence(QutritState::normalized(c)));
  }
  return out;
}

EntanglementSummary summarize_entanglement(const QutritDensityMatrix& rho) {
  EntanglementSummary s;
  s.purity = purity(rho);
  s.low_purity = s.purity < 0.9;
  try {
    auto dom = dominant_eigenstate(rho);
    s.top_eigenvalue = dom.eigenvalue;
    s.concurrence = concurrence(dom.state);
    s.schmidt_number = schmidt_number(std::min(1.0, *s.concurrence));
    s.dominant = dom.state;
  } catch (const DegenerateTop&) {
    Eigen::SelfAdjointEigenSolver<CMat3> es(rho.matrix(), Eigen::EigenvaluesOnly);
    s.top_eigenvalue = es.eigenvalues()(2);
  }
  return s;
}

}  // namespace qfilm
