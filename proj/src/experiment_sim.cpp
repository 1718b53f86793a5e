#include "qfilm/experiment_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "qfilm/errors.hpp"

namespace qfilm {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double NoiseModel::singles_a() const { return background_singles_a + pair_rate / heralding_efficiency; }
double NoiseModel::singles_b() const { return background_singles_b + pair_rate / heralding_efficiency; }

void validate(const NoiseModel& n) {
  if (!(n.pair_rate >= 0.0) || !(n.background_singles_a >= 0.0) || !(n.background_singles_b >= 0.0)) {
    throw PreconditionError("noise model rates must be >= 0");
  }
  if (!(n.bin_width_ns > 0.0)) throw PreconditionError("coincidence window must be > 0");
  if (!(n.heralding_efficiency > 0.0 && n.heralding_efficiency <= 1.0)) {
    throw PreconditionError("heralding efficiency must be in (0, 1]");
  }
  if (!(n.peak_efficiency >= 0.0 && n.peak_efficiency <= 1.0)) {
    throw PreconditionError("peak efficiency must be in [0, 1]");
  }
}

double TimeTagHistogram::expected_accidentals_per_bin() const {
  return singles_a * singles_b * bin_width_ns * 1e-9 * duration_s;
}

namespace {

double poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long long> d(mean);
  return static_cast<double>(d(rng));
}

}  // namespace

TimeTagHistogram simulate_histogram(const NoiseModel& noise, double duration_s, int bins) {
  Rng rng(derive_seed(noise.seed, 0));
  return simulate_histogram(noise, duration_s, bins, rng);
}

TimeTagHistogram simulate_histogram(const NoiseModel& noise, double duration_s, int bins, Rng& rng) {
  validate(noise);
  if (!(duration_s > 0.0)) throw PreconditionError("duration must be > 0");
  if (bins < 1 || bins % 2 == 0) throw PreconditionError("histogram needs an odd number of bins");

  TimeTagHistogram h;
  h.bin_width_ns = noise.bin_width_ns;
  h.duration_s = duration_s;
  h.singles_a = noise.singles_a();
  h.singles_b = noise.singles_b();
  const double acc_mean = h.expected_accidentals_per_bin();
  const int half = bins / 2;
  h.bins.reserve(static_cast<std::size_t>(bins));
  for (int k = -half; k <= half; ++k) h.bins.push_back({k * noise.bin_width_ns, poisson(rng, acc_mean)});
  h.bins[h.central_index()].counts += poisson(rng, noise.pair_rate * duration_s * noise.peak_efficiency);
  return h;
}

NetCoincidences subtract_accidentals(const TimeTagHistogram& h, int exclusion_half_width) {
  if (exclusion_half_width < 0) throw PreconditionError("exclusion half-width must be >= 0");
  const auto c = static_cast<long>(h.central_index());
  double peak = 0.0, off = 0.0;
  std::size_t n_peak = 0, n_off = 0;
  for (std::size_t k = 0; k < h.bins.size(); ++k) {
    if (std::labs(static_cast<long>(k) - c) <= exclusion_half_width) {
      peak += h.bins[k].counts;
      ++n_peak;
    } else {
      off += h.bins[k].counts;
      ++n_off;
    }
  }
  if (n_off < 20) throw TooFewBins(std::to_string(n_off) + " off-peak bins (need >= 20)");

  NetCoincidences out;
  out.off_peak_bins = n_off;
  out.raw_peak = peak;
  out.background_per_bin = off / static_cast<double>(n_off);
  out.accidental_estimate = out.background_per_bin * static_cast<double>(n_peak);
  out.net = peak - out.accidental_estimate;
  // Var(peak) is the expected peak count with net >= 0, i.e. max(peak,
  // accidentals); the raw count alone collapses when the peak bin is nearly
  // empty. Var(mean background) = mean / n_off.
  const double np = static_cast<double>(n_peak);
  out.sigma = std::sqrt(std::max(peak, out.accidental_estimate) +
                        np * np * out.background_per_bin / static_cast<double>(n_off));
  return out;
}

FlatnessTest flatness_test(const TimeTagHistogram& h) {
  if (h.bins.size() < 2) throw PreconditionError("flatness test needs at least 2 bins");
  const double mean = std::accumulate(h.bins.begin(), h.bins.end(), 0.0,
                                      [](double s, const HistogramBin& b) { return s + b.counts; }) /
                      static_cast<double>(h.bins.size());
  if (!(mean > 0.0)) return {0.0, 1.0};
  double chi2 = 0.0;
  for (const auto& b : h.bins) chi2 += (b.counts - mean) * (b.counts - mean) / mean;
  boost::math::chi_squared dist(static_cast<double>(h.bins.size() - 1));
  return {chi2, boost::math::cdf(boost::math::complement(dist, chi2))};
}

}  // namespace qfilm
