#pragma once

#include <array>
#include <optional>

#include "qfilm/qutrit_state.hpp"
#include "qfilm/types.hpp"

namespace qfilm {

// Single-photon Stokes operators (Pauli matrices in the H/V basis):
// S1 = |H><H| - |V><V|, S2 = |D><D| - |A><A|, S3 = |R><R| - |L><L|.
CMat2 stokes_operator(int index);

// Post-selected two-photon polarization state behind a 50/50 splitter.
// Basis order: (H_A H_B, H_A V_B, V_A H_B, V_A V_B).
struct TwoQubitState {
  CVec4 amplitudes;
  double postselection_probability = 0.5;
};

// Qutrit -> two qubits with one photon per arm:
// amplitudes proportional to (c1, c2/sqrt2, c2/sqrt2, c3).
TwoQubitState split_postselect(const QutritState& state);

// Isometry V with V|qutrit> = two-qubit state; V rho V^dagger maps mixed
// qutrit states through the splitter.
Eigen::Matrix<Complex, 4, 3> splitter_isometry();
CMat4 split_postselect(const QutritDensityMatrix& rho);

// Dichotomic +-1 observables for the two arms.
struct ChshSettings {
  CMat2 a, a_prime, b, b_prime;
};

// a = S1, a' = -S2, b = (S1 + S2)/sqrt2, b' = (S1 - S2)/sqrt2 (arm A: a, a'; arm B: b, b').
ChshSettings default_chsh_settings();

// Checks each observable is Hermitian with square = identity (1e-10).
void validate(const ChshSettings& settings);

CMat4 density_of(const TwoQubitState& state);
// Validates a 4x4 two-qubit density matrix; throws InvalidState.
void validate_two_qubit(const CMat4& rho);

double expectation(const CMat4& rho, const CMat2& obs_a, const CMat2& obs_b);

// F = 1/2 |<ab> + <a'b> + <ab'> - <a'b'>|, local bound 1, quantum bound sqrt2.
double chsh_value(const CMat4& rho, const ChshSettings& settings = default_chsh_settings());
double chsh_value(const TwoQubitState& state, const ChshSettings& settings = default_chsh_settings());

// <S_i^A (x) S_j^B>, i, j in {1, 2, 3}.
double correlator(const CMat4& rho, int i, int j);
std::array<std::array<double, 3>, 3> correlator_table(const CMat4& rho);

// p |Psi+><Psi+| + (1 - p) I/4
CMat4 werner_state(double p);

// Counting statistics for one pair of observables: the four outcome
// combinations (++, +-, -+, --) with their background-subtracted counts and
// Poisson variances.
struct CorrelatorCounts {
  std::array<double, 4> net{};
  std::array<double, 4> variance{};
};

struct MeasuredChsh {
  std::array<double, 4> correlators{};  // E(a,b), E(a',b), E(a,b'), E(a',b')
  std::array<double, 4> sigmas{};
  double f = 0.0;
  double sigma_f = 0.0;
  // (F - 1)/sigma_F; empty when sigma_F is zero.
  std::optional<double> violation_sigmas;
};

// E = (N++ - N+- - N-+ + N--)/sum N with first-order error propagation.
MeasuredChsh chsh_from_counts(const std::array<CorrelatorCounts, 4>& counts);

// Projection kets for the +-1 eigenstates of a dichotomic
// observable (eigenvector for +1 first).
std::array<CVec2, 2> eigen_kets(const CMat2& observable);

}  // namespace qfilm
