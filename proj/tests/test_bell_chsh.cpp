#include <cmath>
#include <random>

#include "doctest.h"
#include "qfilm/bell_chsh.hpp"
#include "qfilm/errors.hpp"

using namespace qfilm;

namespace {

CMat2 pauli(int i) {
  CMat2 s;
  if (i == 1) s << 1, 0, 0, -1;
  if (i == 2) s << 0, 1, 1, 0;
  if (i == 3) s << 0, Complex(0, -1), Complex(0, 1), 0;
  return s;
}

CMat4 kron(const CMat2& a, const CMat2& b) {
  CMat4 k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) k(2 * i + p, 2 * j + q) = a(i, j) * b(p, q);
  return k;
}

CMat4 psi_plus() {
  CVec4 v(0, 1, 1, 0);
  v /= std::sqrt(2.0);
  return v * v.adjoint();
}

CMat4 random_two_qubit(std::mt19937_64& rng, int rank) {
  std::normal_distribution<double> g;
  Eigen::Matrix<Complex, 4, Eigen::Dynamic> a(4, rank);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) a(i, j) = {g(rng), g(rng)};
  CMat4 r = a * a.adjoint();
  return r / r.trace().real();
}

CMat2 random_dichotomic(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector3d n(g(rng), g(rng), g(rng));
  n.normalize();
  return n(0) * pauli(1) + n(1) * pauli(2) + n(2) * pauli(3);
}

}  // namespace

TEST_CASE("Stokes operators are the Pauli matrices") {
  for (int i = 1; i <= 3; ++i) CHECK((stokes_operator(i) - pauli(i)).norm() == 0.0);
  CHECK_THROWS_AS(stokes_operator(0), PreconditionError);
}

TEST_CASE("splitter maps the orthogonal pair to Psi+") {
  const TwoQubitState s = split_postselect(QutritState::orthogonal_pair());
  CHECK(s.postselection_probability == 0.5);
  CHECK((density_of(s) - psi_plus()).norm() < 1e-14);
  const auto v = splitter_isometry();
  CHECK((v.adjoint() * v - CMat3::Identity()).norm() < 1e-14);
  const auto rho = QutritDensityMatrix::pure(QutritState::orthogonal_pair());
  CHECK((split_postselect(rho) - psi_plus()).norm() < 1e-14);
}

TEST_CASE("Psi+ correlators and CHSH value") {
  const auto t = correlator_table(psi_plus());
  CHECK(t[0][0] == doctest::Approx(-1.0));
  CHECK(t[1][1] == doctest::Approx(1.0));
  CHECK(t[2][2] == doctest::Approx(1.0));
  CHECK(std::abs(t[0][1]) < 1e-14);
  // Oracle: explicit traces with the default observables.
  const CMat2 a = pauli(1), ap = -pauli(2), b = (pauli(1) + pauli(2)) / std::sqrt(2.0),
              bp = (pauli(1) - pauli(2)) / std::sqrt(2.0);
  const auto e = [&](const CMat2& x, const CMat2& y) { return (psi_plus() * kron(x, y)).trace().real(); };
  const double f = 0.5 * std::abs(e(a, b) + e(ap, b) + e(a, bp) - e(ap, bp));
  CHECK(f == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(chsh_value(psi_plus()) - std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(chsh_value(split_postselect(QutritState::orthogonal_pair())) - std::sqrt(2.0)) < 1e-10);
}

TEST_CASE("Werner states: F = p sqrt2") {
  for (double p : {0.0, 0.5, 0.7071, 0.96, 1.0}) {
    CHECK(chsh_value(werner_state(p)) == doctest::Approx(p * std::sqrt(2.0)).epsilon(1e-12));
  }
  CHECK(chsh_value(werner_state(0.96)) == doctest::Approx(1.357).epsilon(0.001));
}

TEST_CASE("expectation agrees with the trace formula") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const CMat4 rho = random_two_qubit(rng, 1 + t % 4);
    const CMat2 x = random_dichotomic(rng), y = random_dichotomic(rng);
    CHECK(expectation(rho, x, y) == doctest::Approx((rho * kron(x, y)).trace().real()).epsilon(1e-12));
  }
}

TEST_CASE("Tsirelson bound holds for random states and settings") {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 2000; ++t) {
    const CMat4 rho = random_two_qubit(rng, 1 + t % 4);
    CHECK(chsh_value(rho) <= std::sqrt(2.0) + 1e-9);
    const ChshSettings s{random_dichotomic(rng), random_dichotomic(rng), random_dichotomic(rng),
                         random_dichotomic(rng)};
    CHECK(chsh_value(rho, s) <= std::sqrt(2.0) + 1e-9);
  }
}

TEST_CASE("invalid inputs") {
  ChshSettings s = default_chsh_settings();
  CHECK_NOTHROW(validate(s));
  s.b = 2.0 * s.b;
  CHECK_THROWS_AS(validate(s), InvalidState);
  CMat4 bad = psi_plus();
  bad(0, 0) += 0.5;
  CHECK_THROWS_AS(validate_two_qubit(bad), InvalidState);
  CHECK_THROWS_AS(chsh_value(bad), InvalidState);
}

TEST_CASE("eigen kets of dichotomic observables") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 50; ++t) {
    const CMat2 o = random_dichotomic(rng);
    const auto k = eigen_kets(o);
    CHECK((o * k[0] - k[0]).norm() < 1e-12);
    CHECK((o * k[1] + k[1]).norm() < 1e-12);
    CHECK(std::abs(k[0].dot(k[1])) < 1e-12);
  }
}

TEST_CASE("CHSH from ideal counts reproduces the model") {
  const CMat4 rho = werner_state(0.9);
  const ChshSettings s = default_chsh_settings();
  const std::array<std::pair<CMat2, CMat2>, 4> pairs{
      {{s.a, s.b}, {s.a_prime, s.b}, {s.a, s.b_prime}, {s.a_prime, s.b_prime}}};
  std::array<CorrelatorCounts, 4> counts;
  for (std::size_t p = 0; p < 4; ++p) {
    const auto ka = eigen_kets(pairs[p].first), kb = eigen_kets(pairs[p].second);
    for (std::size_t o = 0; o < 4; ++o) {
      const CVec2& x = ka[o / 2];
      const CVec2& y = kb[o % 2];
      const CVec4 k(x(0) * y(0), x(0) * y(1), x(1) * y(0), x(1) * y(1));
      counts[p].net[o] = 1e4 * (k.adjoint() * rho * k)(0, 0).real();
      counts[p].variance[o] = counts[p].net[o];
    }
  }
  const MeasuredChsh m = chsh_from_counts(counts);
  CHECK(m.f == doctest::Approx(chsh_value(rho)).epsilon(1e-12));
  CHECK(m.correlators[0] == doctest::Approx(expectation(rho, s.a, s.b)).epsilon(1e-12));
  REQUIRE(m.violation_sigmas.has_value());
  CHECK(*m.violation_sigmas == doctest::Approx((m.f - 1.0) / m.sigma_f));
}

TEST_CASE("CHSH error propagation matches finite differences") {
  std::array<CorrelatorCounts, 4> c;
  const double base[4][4] = {{80, 20, 25, 90}, {15, 85, 70, 30}, {88, 12, 18, 75}, {40, 60, 55, 45}};
  for (int p = 0; p < 4; ++p)
    for (int o = 0; o < 4; ++o) {
      c[p].net[o] = base[p][o];
      c[p].variance[o] = 1.5 * base[p][o];
    }
  const MeasuredChsh m = chsh_from_counts(c);
  double var = 0.0;
  for (int p = 0; p < 4; ++p)
    for (int o = 0; o < 4; ++o) {
      auto up = c, dn = c;
      const double h = 1e-4;
      up[p].net[o] += h;
      dn[p].net[o] -= h;
      const double d = (chsh_from_counts(up).f - chsh_from_counts(dn).f) / (2 * h);
      var += d * d * c[p].variance[o];
    }
  CHECK(m.sigma_f == doctest::Approx(std::sqrt(var)).epsilon(1e-6));

  std::array<CorrelatorCounts, 4> zero{};
  for (auto& z : zero) z.net = {1, 0, 0, 1};
  CHECK_FALSE(chsh_from_counts(zero).violation_sigmas.has_value());
}
