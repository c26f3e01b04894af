#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "larch/coeff_model.hpp"

namespace larch {

enum class NoiseKind { Gaussian, Table };

/// Innovation law. `Table` resamples uniformly (with replacement) from `table`,
/// which the caller is expected to have standardized to mean 0 and variance 1.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  std::vector<double> table;
};

struct SimConfig {
  std::size_t n = 1000;
  std::size_t burn_in = 10000;
  std::size_t J = 2000;  ///< lag truncation of the coefficient series
  std::uint64_t seed = 1;
  NoiseSpec noise;

  void validate() const;
};

/// A simulated path. Arrays cover burn-in plus analysis window; the window starts at
/// index `first` (0-based) and has length config.n.
struct Sample {
  std::vector<double> x;
  std::vector<double> sigma;
  std::vector<double> eps;
  SimConfig config;
  CoeffSpec spec;
  Theta theta0;
  std::size_t first = 0;

  [[nodiscard]] std::size_t n() const noexcept { return x.size() - first; }
  [[nodiscard]] std::span<const double> window_x() const { return std::span(x).subspan(first); }
  [[nodiscard]] std::span<const double> window_sigma() const { return std::span(sigma).subspan(first); }
  [[nodiscard]] std::span<const double> window_eps() const { return std::span(eps).subspan(first); }
};

/// SplitMix64 finalizer applied to base and stream index:
/// mix(base ^ mix(stream + 0x9E3779B97F4A7C15)).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// `count` innovations from a mt19937_64 engine seeded with `seed`.
[[nodiscard]] std::vector<double> draw_innovations(const NoiseSpec& noise, std::size_t count,
                                                   std::uint64_t seed);

/// Recursion from empty past: sigma_1 = a, sigma_t = a + sum_{j <= min(J, t-1)} b_j x_{t-j},
/// x_t = eps_t sigma_t. Validates theta0 against `space`.
[[nodiscard]] Sample simulate(const CoeffSpec& spec, const Theta& theta0, const SimConfig& cfg,
                              const ParamSpace& space = {});

/// Same recursion driven by caller-supplied innovations; no parameter-space check.
[[nodiscard]] Sample simulate_from_innovations(const CoeffSpec& spec, const Theta& theta0,
                                               std::vector<double> eps, std::size_t burn_in,
                                               std::size_t J);

inline constexpr std::uint64_t kVolterraDefaultBudget = 10'000'000;

/// Per-order contributions of the finite-past Volterra expansion of sigma_t:
/// entry k-1 holds a * sum over lag chains t > s_1 > ... > s_k >= 1 (each step <= J) of
/// b_{t-s_1} b_{s_1-s_2} ... eps_{s_1} ... eps_{s_k}. Indices are 1-based.
[[nodiscard]] std::vector<double> volterra_orders(const CoeffSpec& spec, const Theta& theta0,
                                                  std::span<const double> eps_prefix, std::size_t t,
                                                  std::size_t K_max, std::size_t J = SIZE_MAX,
                                                  std::uint64_t budget = kVolterraDefaultBudget);

/// a + sum of volterra_orders. With K_max >= t-1 this is the empty-past recursion value.
[[nodiscard]] double volterra_sigma(const CoeffSpec& spec, const Theta& theta0,
                                    std::span<const double> eps_prefix, std::size_t t,
                                    std::size_t K_max, std::size_t J = SIZE_MAX,
                                    std::uint64_t budget = kVolterraDefaultBudget);

}  // namespace larch
