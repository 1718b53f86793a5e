#include "qfilm/bell_chsh.hpp"

#include <cmath>
#include <string>

#include "qfilm/errors.hpp"

namespace qfilm {

CMat2 stokes_operator(int index) {
  CMat2 s;
  switch (index) {
    case 1: s << 1.0, 0.0, 0.0, -1.0; break;
    case 2: s << 0.0, 1.0, 1.0, 0.0; break;
    case 3: s << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0; break;
    default: throw PreconditionError("Stokes index must be 1, 2 or 3");
  }
  return s;
}

Eigen::Matrix<Complex, 4, 3> splitter_isometry() {
  Eigen::Matrix<Complex, 4, 3> v = Eigen::Matrix<Complex, 4, 3>::Zero();
  v(0, 0) = 1.0;
  v(1, 1) = kInvSqrt2;
  v(2, 1) = kInvSqrt2;
  v(3, 2) = 1.0;
  return v;
}

TwoQubitState split_postselect(const QutritState& state) {
  CVec4 amp = splitter_isometry() * state.amplitudes();
  amp.normalize();
  // Both photons leave through different ports with probability 1/2 for any
  // polarization state: the pair amplitudes are state-independent.
  return {amp, 0.5};
}

CMat4 split_postselect(const QutritDensityMatrix& rho) {
  const auto v = splitter_isometry();
  return v * rho.matrix() * v.adjoint();
}

ChshSettings default_chsh_settings() {
  const CMat2 s1 = stokes_operator(1);
  const CMat2 s2 = stokes_operator(2);
  return {s1, -s2, (s1 + s2) * kInvSqrt2, (s1 - s2) * kInvSqrt2};
}

void validate(const ChshSettings& s) {
  for (const CMat2* m : {&s.a, &s.a_prime, &s.b, &s.b_prime}) {
    if ((*m - m->adjoint()).cwiseAbs().maxCoeff() > 1e-10 ||
        (*m * *m - CMat2::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
      throw InvalidState("CHSH observable is not a Hermitian involution");
    }
  }
}

CMat4 density_of(const TwoQubitState& state) {
  if (std::abs(state.amplitudes.squaredNorm() - 1.0) > 1e-12) {
    throw InvalidState("two-qubit amplitudes are not normalized");
  }
  return state.amplitudes * state.amplitudes.adjoint();
}

void validate_two_qubit(const CMat4& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw InvalidState("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw InvalidState("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMat4> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) throw InvalidState("density matrix has a negative eigenvalue");
}

double expectation(const CMat4& rho, const CMat2& obs_a, const CMat2& obs_b) {
  // Basis index = 2*a + b, so the joint observable is kron(obs_a, obs_b).
  CMat4 joint;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) joint.block<2, 2>(2 * i, 2 * j) = obs_a(i, j) * obs_b;
  return (rho * joint).trace().real();
}

double chsh_value(const CMat4& rho, const ChshSettings& s) {
  validate_two_qubit(rho);
  validate(s);
  const double sum = expectation(rho, s.a, s.b) + expectation(rho, s.a_prime, s.b) +
                     expectation(rho, s.a, s.b_prime) - expectation(rho, s.a_prime, s.b_prime);
  return 0.5 * std::abs(sum);
}

double chsh_value(const TwoQubitState& state, const ChshSettings& s) { return chsh_value(density_of(state), s); }

double correlator(const CMat4& rho, int i, int j) {
  validate_two_qubit(rho);
  return expectation(rho, stokes_operator(i), stokes_operator(j));
}

std::array<std::array<double, 3>, 3> correlator_table(const CMat4& rho) {
  std::array<std::array<double, 3>, 3> t{};
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) t[i - 1][j - 1] = correlator(rho, i, j);
  return t;
}

CMat4 werner_state(double p) {
  CVec4 psi_plus(0.0, kInvSqrt2, kInvSqrt2, 0.0);
  return p * psi_plus * psi_plus.adjoint() + (1.0 - p) * CMat4::Identity() / 4.0;
}

MeasuredChsh chsh_from_counts(const std::array<CorrelatorCounts, 4>& counts) {
  MeasuredChsh out;
  double var_sum = 0.0;
  constexpr std::array<double, 4> kSign = {1.0, -1.0, -1.0, 1.0};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& c = counts[k];
    double total = 0.0, diff = 0.0;
    for (std::size_t o = 0; o < 4; ++o) {
      total += c.net[o];
      diff += kSign[o] * c.net[o];
    }
    if (!(total > 0.0)) throw InvalidState("no net coincidences for CHSH setting " + std::to_string(k));
    const double e = diff / total;
    // dE/dN_o = (s_o - E)/total
    double var = 0.0;
    for (std::size_t o = 0; o < 4; ++o) var += std::pow((kSign[o] - e) / total, 2) * c.variance[o];
    out.correlators[k] = e;
    out.sigmas[k] = std::sqrt(var);
    var_sum += var;
  }
  const double s = out.correlators[0] + out.correlators[1] + out.correlators[2] - out.correlators[3];
  out.f = 0.5 * std::abs(s);
  out.sigma_f = 0.5 * std::sqrt(var_sum);
  if (out.sigma_f > 0.0) out.violation_sigmas = (out.f - 1.0) / out.sigma_f;
  return out;
}

std::array<CVec2, 2> eigen_kets(const CMat2& observable) {
  Eigen::SelfAdjointEigenSolver<CMat2> es(observable);
  // ascending: eigenvalue -1 first
  return {CVec2(es.eigenvectors().col(1)), CVec2(es.eigenvectors().col(0))};
}

}  // namespace qfilm
