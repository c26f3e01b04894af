#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "larch/asymptotics.hpp"
#include "larch/coeff_model.hpp"

namespace larch {

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double k_min = 0.0;  ///< smallest lag actually used
  double k_max = 0.0;  ///< largest lag actually used
  std::size_t points = 0;
};

/// OLS of ln(value) on ln(k) over pairs with k_min <= k <= k_max, k > 0 and value > 0;
/// other pairs are skipped. Throws InsufficientDataError below 5 usable pairs.
[[nodiscard]] DecayFit fit_decay(std::span<const double> k, std::span<const double> value, double k_min,
                                 double k_max);

struct ScoreGapSettings {
  std::size_t replicates = 50;
  std::uint64_t base_seed = 1;
  std::size_t burn_in = 10000;
  std::size_t J = 2000;
  unsigned threads = 1;
};

struct ScoreGap {
  double mean_abs = 0.0;  ///< MC mean of sqrt(m) |score_d(full) - score_d(finite past)|
  double std_error = 0.0;
  double mean_norm = 0.0;  ///< same for the Euclidean norm of the whole score difference
  std::size_t window = 0;  ///< m(n) + 1 averaged points
  RatePrediction predicted;
};

/// Difference between the truncated-window score at theta0 computed with full-history
/// sigma_t and with the finite-past sigma_bar_t, averaged over independent paths.
/// The d-component is the headline number: it vanishes identically when c = 0.
/// Needs J >= n: with fewer lags the full-history sigma never leaves the window and the
/// difference measures lag truncation instead.
[[nodiscard]] ScoreGap score_gap(const CoeffSpec& spec, const Theta& theta0, double epsilon, std::size_t n,
                                 double beta, const ScoreGapSettings& settings);

}  // namespace larch
