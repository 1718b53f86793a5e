#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "qfilm/errors.hpp"
#include "qfilm/experiment_sim.hpp"
#include "qfilm/pipeline.hpp"

using namespace qfilm;

namespace {

NoiseModel model(double pair_rate, double bg, std::uint64_t seed) {
  NoiseModel n;
  n.pair_rate = pair_rate;
  n.background_singles_a = bg;
  n.background_singles_b = bg;
  n.bin_width_ns = 0.1;
  n.seed = seed;
  return n;
}

}  // namespace

TEST_CASE("seed derivation") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m : {0ULL, 1ULL, 42ULL})
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(m, i));
  CHECK(seen.size() == 3000);
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("histogram is deterministic under a fixed seed") {
  const auto a = simulate_histogram(model(50.0, 1e4, 9), 10.0, 101);
  const auto b = simulate_histogram(model(50.0, 1e4, 9), 10.0, 101);
  const auto c = simulate_histogram(model(50.0, 1e4, 10), 10.0, 101);
  bool differs = false;
  for (std::size_t k = 0; k < a.bins.size(); ++k) {
    CHECK(a.bins[k].counts == b.bins[k].counts);
    CHECK(a.bins[k].dt_ns == b.bins[k].dt_ns);
    differs |= a.bins[k].counts != c.bins[k].counts;
  }
  CHECK(differs);
}

TEST_CASE("histogram layout and preconditions") {
  const auto h = simulate_histogram(model(0.0, 1e4, 1), 1.0, 21);
  REQUIRE(h.bins.size() == 21);
  CHECK(h.bins[h.central_index()].dt_ns == 0.0);
  for (std::size_t k = 1; k < h.bins.size(); ++k) {
    CHECK(h.bins[k].dt_ns - h.bins[k - 1].dt_ns == doctest::Approx(0.1));
    CHECK(h.bins[k].counts >= 0.0);
  }
  CHECK_THROWS_AS(simulate_histogram(model(1.0, 1.0, 1), 1.0, 20), PreconditionError);
  CHECK_THROWS_AS(simulate_histogram(model(1.0, 1.0, 1), 0.0, 21), PreconditionError);
  CHECK_THROWS_AS(simulate_histogram(model(-1.0, 1.0, 1), 1.0, 21), PreconditionError);
  NoiseModel bad = model(1.0, 1.0, 1);
  bad.bin_width_ns = 0.0;
  CHECK_THROWS_AS(simulate_histogram(bad, 1.0, 21), PreconditionError);
}

TEST_CASE("singles include unheralded pair photons") {
  NoiseModel n = model(20.0, 1000.0, 0);
  n.heralding_efficiency = 0.1;
  CHECK(n.singles_a() == doctest::Approx(1200.0));
  const auto h = simulate_histogram(n, 2.0, 21);
  CHECK(h.expected_accidentals_per_bin() == doctest::Approx(1200.0 * 1200.0 * 0.1e-9 * 2.0));
}

TEST_CASE("no pairs: flat histogram accepted at the 5% level") {
  int accepted = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    accepted += flatness_test(simulate_histogram(model(0.0, 2e4, s), 60.0, 201)).p_value > 0.05;
  }
  // Nominal acceptance is 95%.
  CHECK(accepted >= 180);
}

TEST_CASE("accidental subtraction") {
  int flat_ok = 0, peak_ok = 0;
  double bias = 0.0;
  const double truth = 20.0 * 60.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto flat = subtract_accidentals(simulate_histogram(model(0.0, 2e4, s), 60.0, 201), 0);
    flat_ok += std::abs(flat.net) <= 3.0 * flat.sigma;
    const auto peak = subtract_accidentals(simulate_histogram(model(20.0, 2e4, 1000 + s), 60.0, 201), 0);
    peak_ok += std::abs(peak.net - truth) <= 3.0 * peak.sigma;
    if (s < 100) bias += (peak.net - truth) / truth;
  }
  CHECK(flat_ok >= 194);
  CHECK(peak_ok >= 194);
  CHECK(std::abs(bias / 100.0) < 0.02);
}

TEST_CASE("subtraction sigma and exclusion window") {
  TimeTagHistogram h;
  h.bin_width_ns = 1.0;
  for (int k = -20; k <= 20; ++k) h.bins.push_back({double(k), k == 0 ? 150.0 : (std::abs(k) == 1 ? 60.0 : 50.0)});
  const auto one = subtract_accidentals(h, 0);
  CHECK(one.off_peak_bins == 40);
  CHECK(one.background_per_bin == doctest::Approx((38 * 50.0 + 2 * 60.0) / 40.0));
  CHECK(one.net == doctest::Approx(150.0 - one.background_per_bin));
  CHECK(one.sigma == doctest::Approx(std::sqrt(150.0 + one.background_per_bin / 40.0)));
  const auto three = subtract_accidentals(h, 1);
  CHECK(three.net == doctest::Approx(270.0 - 3 * 50.0));
  CHECK_THROWS_AS(subtract_accidentals(h, 15), TooFewBins);
  CHECK_THROWS_AS(subtract_accidentals(h, -1), PreconditionError);
}

TEST_CASE("equal singles products: same background, peaks scale with pair rate") {
  // Singles = background + pair_rate / heralding; pick backgrounds to match.
  NoiseModel lo = model(10.0, 2e4 - 100.0, 5), hi = model(100.0, 2e4 - 1000.0, 6);
  CHECK(lo.singles_a() * lo.singles_b() == doctest::Approx(hi.singles_a() * hi.singles_b()));
  const auto a = subtract_accidentals(simulate_histogram(lo, 600.0, 201), 0);
  const auto b = subtract_accidentals(simulate_histogram(hi, 600.0, 201), 0);
  const double bg_sigma = std::sqrt(a.background_per_bin / 200.0 + b.background_per_bin / 200.0);
  CHECK(std::abs(a.background_per_bin - b.background_per_bin) < 3.0 * bg_sigma);
  const double ratio = b.net / a.net;
  const double ratio_sigma = ratio * std::hypot(a.sigma / a.net, b.sigma / b.net);
  CHECK(std::abs(ratio - 10.0) < 3.0 * ratio_sigma);
}

TEST_CASE("CHSH sigma shrinks as one over root duration") {
  const auto rho = QutritDensityMatrix::depolarized(QutritDensityMatrix::pure(QutritState::orthogonal_pair()), 0.97);
  CountingConfig c;
  std::vector<double> lx, ly;
  for (double t : {10.0, 40.0, 160.0, 640.0}) {
    c.bell_duration_s = t;
    double mean_sigma = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) mean_sigma += simulate_bell(rho, c, s, 0).sigma_f / 10.0;
    lx.push_back(std::log(t));
    ly.push_back(std::log(mean_sigma));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 4, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 4;
  double sxy = 0.0, sxx = 0.0;
  for (int k = 0; k < 4; ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  CHECK(sxy / sxx == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("tomography simulation: seeds are per setting, not per thread") {
  const auto rho = QutritDensityMatrix::pure(QutritState::orthogonal_pair());
  const auto protocol = TomographyProtocol::default_nine();
  CountingConfig c;
  const auto sim = simulate_tomography(rho, protocol, c, 77, 1);
  const auto rates = forward_rates(rho, protocol, c.pair_rate / 2.0);
  for (std::size_t m = 0; m < protocol.size(); ++m) {
    NoiseModel n;
    n.pair_rate = rates[m];
    n.background_singles_a = c.background_singles_a;
    n.background_singles_b = c.background_singles_b;
    n.heralding_efficiency = c.heralding_efficiency;
    n.bin_width_ns = c.bin_width_ns;
    Rng rng(derive_seed(77, tomography_stream(1, m)));
    const auto net = subtract_accidentals(simulate_histogram(n, c.tomography_duration_s, c.bins, rng), 0);
    CHECK(sim.records[m].net_coincidences() == net.net);
    CHECK(sim.sigmas[m] == net.sigma);
  }
}

TEST_CASE("noiseless pipeline: exact forward values and zero errors") {
  ExperimentConfig cfg;
  cfg.pumps = {{"V", 90.0}};
  cfg.crystal.azimuth_deg = 49.2;
  cfg.counting.noiseless = true;
  const RunResult r = run_experiment(cfg);
  const PumpResult& p = r.pumps.at(0);
  const auto w = p.model_state.weights();
  for (int i = 0; i < 3; ++i) {
    CHECK(p.weights[static_cast<std::size_t>(i)].value == doctest::Approx(w(i)).epsilon(1e-9));
    CHECK(p.weights[static_cast<std::size_t>(i)].sigma == 0.0);
  }
  CHECK(p.purity.sigma == 0.0);
  CHECK(p.chsh.sigma_f == 0.0);
  CHECK(p.chsh.f == doctest::Approx(p.chsh_model).epsilon(1e-9));
  REQUIRE(p.concurrence.has_value());
  CHECK(p.concurrence->value == doctest::Approx(concurrence(p.model_state)).epsilon(1e-8));
}

TEST_CASE("pipeline errors carry the stage name") {
  ExperimentConfig cfg;
  cfg.pumps = {{"H", 0.0}};
  cfg.crystal.tilt_deg = 0.0;
  cfg.crystal.azimuth_deg = 0.0;
  try {
    run_experiment(cfg);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "crystal_tensor");
    CHECK(std::string(e.kind()) == "ZeroAmplitude");
    CHECK(e.exit_code() == ExitCode::kNumerical);
  }
}
