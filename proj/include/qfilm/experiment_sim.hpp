#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qfilm {

// Name recorded in reports; see derive_seed() for the splitting rule.
inline constexpr const char* kRngAlgorithm = "mt19937_64; task seed = splitmix64(master + (index+1)*0x9E3779B97F4A7C15)";

// Per-task seed: splitmix64 finalizer of master + (index + 1) * 0x9E3779B97F4A7C15.
// Distinct indices give decorrelated streams regardless of execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

using Rng = std::mt19937_64;

struct NoiseModel {
  double pair_rate = 0.0;             // true coincidences per second
  double background_singles_a = 0.0;  // counts/s in arm A (photoluminescence + darks)
  double background_singles_b = 0.0;
  // Probability that the partner of a detected photon is also detected.
  double heralding_efficiency = 0.1;
  // Fraction of true coincidences landing in the central bin.
  double peak_efficiency = 1.0;
  double bin_width_ns = 0.1;
  std::uint64_t seed = 0;

  // Detector singles: background plus photons whose partner was lost.
  double singles_a() const;
  double singles_b() const;
};

void validate(const NoiseModel& noise);

struct HistogramBin {
  double dt_ns;
  double counts;
};

struct TimeTagHistogram {
  double bin_width_ns = 0.0;
  std::vector<HistogramBin> bins;  // uniform, centred on dt = 0
  double duration_s = 0.0;
  double singles_a = 0.0;
  double singles_b = 0.0;

  std::size_t central_index() const { return bins.size() / 2; }
  // Expected accidentals per bin: r_A r_B tau_bin T.
  double expected_accidentals_per_bin() const;
};

// `bins` must be odd so that one bin is centred on zero delay.
// True pairs: Poisson(pair_rate * duration * peak_efficiency) in the central
// bin; every bin gets Poisson(r_A r_B bin_width duration) accidentals.
TimeTagHistogram simulate_histogram(const NoiseModel& noise, double duration_s, int bins);
TimeTagHistogram simulate_histogram(const NoiseModel& noise, double duration_s, int bins, Rng& rng);

struct NetCoincidences {
  double net = 0.0;
  double sigma = 0.0;
  double raw_peak = 0.0;             // counts in the peak region
  double accidental_estimate = 0.0;  // background level times peak-bin count
  double background_per_bin = 0.0;
  std::size_t off_peak_bins = 0;
};

// Peak region: the `exclusion_half_width` bins on each side of the centre
// plus the centre bin. Background is the mean of all other bins;
// sigma^2 = max(peak, accidentals) + n_peak^2 * background / n_off.
// Throws TooFewBins when fewer than 20 off-peak bins remain.
NetCoincidences subtract_accidentals(const TimeTagHistogram& h, int exclusion_half_width);

// Pearson chi^2 statistic of the counts against their mean and its p-value
// (upper tail, bins - 1 degrees of freedom).
struct FlatnessTest {
  double chi2;
  double p_value;
};
FlatnessTest flatness_test(const TimeTagHistogram& h);

}  // namespace qfilm
