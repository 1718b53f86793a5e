#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "qfilm/bell_chsh.hpp"
#include "qfilm/errors.hpp"
#include "qfilm/qutrit_state.hpp"

using namespace qfilm;

namespace {

CVec3 random_amplitudes(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVec3 c;
  for (int i = 0; i < 3; ++i) c(i) = {g(rng), g(rng)};
  return c / c.norm();
}

// Two-qubit concurrence |<psi| sy (x) sy |psi*>| of the split state.
double wootters_pure(const CVec4& psi) {
  CMat2 sy;
  sy << 0.0, Complex(0, -1), Complex(0, 1), 0.0;
  CMat4 yy;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) yy(2 * i + k, 2 * j + l) = sy(i, j) * sy(k, l);
  return std::abs(psi.dot(yy * psi.conjugate()));
}

// Schmidt number 1 / sum p_i^2 from the reduced density matrix of arm A.
double schmidt_from_reduced(const CVec4& psi) {
  CMat2 rho_a = CMat2::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 2; ++k) rho_a(a, b) += psi(2 * a + k) * std::conj(psi(2 * b + k));
  Eigen::SelfAdjointEigenSolver<CMat2> es(rho_a);
  return 1.0 / es.eigenvalues().squaredNorm();
}

CMat3 random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = {g(rng), g(rng)};
  CMat3 r = a * a.adjoint();
  return r / r.trace().real();
}

}  // namespace

TEST_CASE("normalization is enforced") {
  CHECK_THROWS_AS(QutritState(1.0, 1.0, 0.0), NotNormalized);
  CHECK_NOTHROW(QutritState(1.0, 0.0, 0.0));
  const QutritState s = QutritState::normalized(CVec3(1.0, 1.0, 0.0));
  CHECK(s.weights().sum() == doctest::Approx(1.0));
}

TEST_CASE("concurrence of the basis and NOON-like states") {
  CHECK(concurrence(QutritState::orthogonal_pair()) == 1.0);
  CHECK(concurrence(QutritState::co_polarized_h()) == 0.0);
  CHECK(concurrence(QutritState::co_polarized_v()) == 0.0);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(concurrence(QutritState(r, 0.0, r)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(concurrence(CVec3(1.0, 1.0, 1.0)), NotNormalized);
}

TEST_CASE("concurrence equals the two-qubit concurrence after the splitter") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 500; ++t) {
    const QutritState s(random_amplitudes(rng));
    const double c = concurrence(s);
    CHECK(c >= 0.0);
    CHECK(c <= 1.0 + 1e-12);
    CHECK(c == doctest::Approx(wootters_pure(split_postselect(s).amplitudes)).epsilon(1e-10));
  }
}

TEST_CASE("Schmidt number from concurrence matches the reduced-state oracle") {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 300; ++t) {
    const QutritState s(random_amplitudes(rng));
    const double k = schmidt_number(concurrence(s));
    CHECK(k == doctest::Approx(schmidt_from_reduced(split_postselect(s).amplitudes)).epsilon(1e-9));
    CHECK(k >= 1.0);
    CHECK(k <= 2.0 + 1e-12);
  }
}

TEST_CASE("Schmidt number values and range") {
  CHECK(schmidt_number(0.0) == 1.0);
  CHECK(schmidt_number(1.0) == 2.0);
  CHECK(schmidt_number(0.98) == doctest::Approx(1.92).epsilon(0.01));
  CHECK(schmidt_number(0.4) == doctest::Approx(1.087).epsilon(0.005));
  CHECK_THROWS_AS(schmidt_number(1.1), OutOfRange);
  CHECK_THROWS_AS(schmidt_number(-0.1), OutOfRange);
  for (int k = 0; k <= 20; ++k) {
    const double c = k / 20.0;
    CHECK(concurrence_from_schmidt(schmidt_number(c)) == doctest::Approx(c).epsilon(1e-12));
    if (k > 0) CHECK(schmidt_number(c) > schmidt_number((k - 1) / 20.0));
  }
}

TEST_CASE("density matrix validation") {
  CMat3 m = CMat3::Identity() / 3.0;
  CHECK_NOTHROW(QutritDensityMatrix{m});
  CMat3 bad_trace = CMat3::Identity();
  CHECK_THROWS_AS(QutritDensityMatrix{bad_trace}, InvalidDensityMatrix);
  CMat3 non_herm = m;
  non_herm(0, 1) = 0.1;
  CHECK_THROWS_AS(QutritDensityMatrix{non_herm}, InvalidDensityMatrix);
  CMat3 negative = CMat3::Zero();
  negative.diagonal() << 1.2, -0.2, 0.0;
  CHECK_THROWS_AS(QutritDensityMatrix{negative}, InvalidDensityMatrix);
}

TEST_CASE("purity of pure, mixed and depolarized states") {
  std::mt19937_64 rng(23);
  const auto pure = QutritDensityMatrix::pure(QutritState(random_amplitudes(rng)));
  CHECK(purity(pure) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(purity(QutritDensityMatrix::maximally_mixed()) == doctest::Approx(1.0 / 3.0));
  for (double p : {0.0, 0.5, 0.96, 1.0}) {
    const auto d = QutritDensityMatrix::depolarized(pure, p);
    CHECK(purity(d) == doctest::Approx(p * p + (1.0 - p * p) / 3.0).epsilon(1e-12));
  }
  for (int t = 0; t < 100; ++t) {
    const double pu = purity(QutritDensityMatrix(random_density(rng)));
    CHECK(pu >= 1.0 / 3.0 - 1e-12);
    CHECK(pu <= 1.0 + 1e-12);
  }
}

TEST_CASE("dominant eigenstate") {
  std::mt19937_64 rng(29);
  const QutritState psi(random_amplitudes(rng));
  const auto rho = QutritDensityMatrix::depolarized(QutritDensityMatrix::pure(psi), 0.9);
  const DominantEigenstate d = dominant_eigenstate(rho);
  CHECK(d.eigenvalue == doctest::Approx(0.9 + 0.1 / 3.0));
  CHECK(std::abs(psi.amplitudes().dot(d.state.amplitudes())) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(dominant_eigenstate(QutritDensityMatrix::maximally_mixed()), DegenerateTop);
}

TEST_CASE("magnitudes alone do not fix the concurrence") {
  std::vector<double> phases;
  for (int k = 0; k <= 64; ++k) phases.push_back(2.0 * kPi * k / 64.0);
  // c2 = 0: 2 sqrt(w1 w3), independent of phase.
  for (double c : concurrence_vs_relative_phase({0.79, 0.0, 0.21}, phases)) {
    CHECK(c == doctest::Approx(2.0 * std::sqrt(0.79 * 0.21)));
  }
  const Eigen::Vector3d w(0.5, 0.2, 0.3);
  const auto cs = concurrence_vs_relative_phase(w, phases);
  const double a = 2.0 * std::sqrt(w(0) * w(2));
  CHECK(*std::min_element(cs.begin(), cs.end()) == doctest::Approx(std::abs(a - w(1))));
  CHECK(*std::max_element(cs.begin(), cs.end()) == doctest::Approx(a + w(1)));
}

TEST_CASE("entanglement summary flags low purity") {
  const auto pure = QutritDensityMatrix::pure(QutritState::orthogonal_pair());
  const auto s = summarize_entanglement(pure);
  REQUIRE(s.concurrence.has_value());
  CHECK(*s.concurrence == doctest::Approx(1.0));
  CHECK(*s.schmidt_number == doctest::Approx(2.0));
  CHECK_FALSE(s.low_purity);
  const auto noisy = summarize_entanglement(QutritDensityMatrix::depolarized(pure, 0.6));
  CHECK(noisy.low_purity);
  CHECK_FALSE(summarize_entanglement(QutritDensityMatrix::maximally_mixed()).concurrence.has_value());
}
