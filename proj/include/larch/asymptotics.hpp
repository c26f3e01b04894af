#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "larch/coeff_model.hpp"

namespace larch {

/// Settings for the single long stationary path used for ergodic averages.
struct PathAverageSettings {
  std::size_t path_length = 500000;  ///< after burn-in
  std::size_t burn_in = 10000;
  std::size_t J = 2000;
  std::uint64_t seed = 1;
  std::size_t blocks = 50;  ///< batch count for Monte Carlo standard errors
};

struct SandwichResult {
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();  ///< H^{-1} G H^{-1}
  Eigen::Vector3d sd = Eigen::Vector3d::Zero();   ///< sqrt(diag(cov))
  Eigen::Matrix3d G_se = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d H_se = Eigen::Matrix3d::Zero();
  std::size_t mc_samples = 0;
  double h_condition = 0.0;  ///< ratio of extreme eigenvalues of H
};

/// Time-t ingredients at theta0: sigma_t and its gradient in (d, c, a).
struct SigmaGradientPath {
  std::vector<double> sigma;
  std::vector<Eigen::Vector3d> grad;
};

/// Simulates one stationary path and returns sigma_t, d sigma_t / d theta over the
/// post-burn-in segment, both from the J-lag full history.
[[nodiscard]] SigmaGradientPath sigma_gradient_path(const CoeffSpec& spec, const Theta& theta0,
                                                    const PathAverageSettings& mc);

/// Which of (d, c, a) the estimator optimizes; the others are held at their true values.
using FreeMask = std::array<bool, 3>;
inline constexpr FreeMask kAllFree{true, true, true};

/// G_eps = (E eps^4 - 1) E[4 sigma^6/(sigma^2+eps)^4 sdot sdot^T],
/// H_eps = E[4 sigma^2/(sigma^2+eps)^2 sdot sdot^T] by ergodic averaging, and the
/// sandwich H^{-1} G H^{-1}. Throws SingularityError (with eigenvalues) when H or G
/// fails a Cholesky factorization.
///
/// With some coordinates fixed, cov is the sandwich of the free sub-block and is zero
/// in the fixed rows and columns; G and H are always the full 3x3 averages.
[[nodiscard]] SandwichResult sandwich(const CoeffSpec& spec, const Theta& theta0, double epsilon,
                                      const NoiseMoments& nm, const PathAverageSettings& mc,
                                      const FreeMask& free = kAllFree);

/// Same averages from a precomputed path.
[[nodiscard]] SandwichResult sandwich_from_path(const SigmaGradientPath& path, double epsilon, double mu4,
                                                std::size_t blocks, const FreeMask& free = kAllFree);

struct LimitH0Result {
  bool diverged = false;
  Eigen::Matrix3d H0 = Eigen::Matrix3d::Zero();  ///< 4 E[sdot sdot^T / sigma^2]
  /// (E eps^4 - 1) H0^{-1} when H0 is finite and invertible.
  std::optional<Eigen::Matrix3d> limit_cov;
  double max_block_ratio = 0.0;   ///< largest block mean of 4/sigma^2 over the median one
  double max_term_share = 0.0;    ///< largest single 4/sigma^2 term over the total
};

/// Epsilon -> 0 limit of the sandwich with a divergence monitor: the running average of
/// 4/sigma_t^2 must settle (no single term or block dominating), otherwise the result is
/// flagged as diverged because E sigma^{-2} may be infinite.
[[nodiscard]] LimitH0Result limit_h0(const CoeffSpec& spec, const Theta& theta0, const NoiseMoments& nm,
                                     const PathAverageSettings& mc);

[[nodiscard]] LimitH0Result limit_h0_from_path(const SigmaGradientPath& path, double mu4, std::size_t blocks);

struct RatePrediction {
  double score_gap_order = 0.0;  ///< beta/2 + d - 1/2, exponent of E|d_n|
  double rate_exponent = 0.0;    ///< exponent of E|theta_hat - theta0|
  bool clt_regime = false;       ///< beta < 1 - 2d
  double score_gap_scale = 0.0;  ///< n^{score_gap_order}
  double rate_scale = 0.0;       ///< n^{rate_exponent}
};

[[nodiscard]] RatePrediction predicted_rate(std::size_t n, double beta, double d);

}  // namespace larch
