#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "larch/asymptotics.hpp"
#include "larch/coeff_model.hpp"
#include "larch/estimator.hpp"

namespace larch {

struct StudyConfig {
  std::string label = "custom";
  Theta theta0{0.1, 0.2, 1.0};
  double epsilon = 0.01;
  double beta = 0.799;
  std::vector<std::size_t> ns{1000};
  std::size_t replicates = 100;
  std::uint64_t base_seed = 1;
  std::size_t trim = 10;  ///< number of smallest d-hat values dropped for trimmed statistics
  CoeffSpec spec;
  std::size_t burn_in = 10000;
  std::size_t J = 2000;
  ParamSpace space;
  OptimOptions optim;
  FreeMask free = kAllFree;  ///< estimated coordinates; the rest stay at theta0
  unsigned threads = 1;

  void validate() const;
};

/// Simulation designs: case 1 is (d, c, a) = (0.1, 0.2, 1), beta = 0.799; case 2 is
/// (0.2, 0.2, 1), beta = 0.599; both with epsilon = 0.01 and n in {1000, 2500, 5000, 10000}.
/// Only d is estimated; c and a are held at their true values.
[[nodiscard]] StudyConfig case_preset(int case_number);

struct ReplicateRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  Theta theta_hat;
  double loss = 0.0;
  bool converged = false;
  bool at_boundary = false;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double s = 0.0;        ///< standard deviation, denominator count - 1
  double s_tilde = 0.0;  ///< MAD / Phi^{-1}(0.75)
  double scaled_s = 0.0;        ///< n^{beta/2} s
  double scaled_s_tilde = 0.0;  ///< n^{beta/2} s_tilde
  std::optional<double> skewness;    ///< m3 / m2^{3/2}; empty when m2 = 0
  std::optional<double> q_skewness;  ///< Bowley; empty when Q3 = Q1
};

struct SummaryRecord {
  SummaryStats all;
  SummaryStats trimmed;  ///< after removing the trim_k smallest values
};

struct NSummary {
  std::size_t n = 0;
  SummaryRecord d_hat;
  std::size_t boundary_hits = 0;
  std::size_t non_converged = 0;
};

struct McReport {
  std::string label;
  double beta = 0.0;
  std::size_t trim = 0;
  std::vector<ReplicateRow> rows;  ///< ordered by n, then replicate
  std::vector<NSummary> summaries;
};

inline constexpr double kMadScale = 0.67448975019608174320;  // Phi^{-1}(0.75)

/// Sample quantile by linear interpolation between order statistics at position
/// 1 + (N-1) p (1-based) of the sorted values.
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double p);

[[nodiscard]] SummaryStats summary_stats(std::span<const double> values, std::size_t n, double beta);

/// Untrimmed and trimmed statistics of `values`. Needs at least 4 values and
/// trim_k + 4 <= size.
[[nodiscard]] SummaryRecord summarize(std::span<const double> values, std::size_t n, double beta,
                                      std::size_t trim_k);

/// Replicate r at every n uses seed derive_seed(base_seed, r); rows keep replicate order
/// regardless of how many threads ran them.
[[nodiscard]] McReport run_study(const StudyConfig& cfg);

/// Recomputes the per-n summaries from rows (used by run_study and for checking reports).
[[nodiscard]] std::vector<NSummary> summarize_rows(std::span<const ReplicateRow> rows, double beta,
                                                   std::size_t trim);

[[nodiscard]] double normal_quantile(double p);

/// (Phi^{-1}((i - 0.5)/N), v_(i)) for the sorted values.
[[nodiscard]] std::vector<std::pair<double, double>> normal_plot_data(std::span<const double> values);

/// Sample autocorrelations rho(0..max_lag) of x (or x^2) with the global mean and the
/// n-denominator convention. Empty when the series has zero variance.
[[nodiscard]] std::optional<std::vector<double>> acf(std::span<const double> x, std::size_t max_lag,
                                                     bool on_squares);

}  // namespace larch
