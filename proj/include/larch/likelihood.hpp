#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "larch/coeff_model.hpp"
#include "larch/simulator.hpp"

namespace larch {

enum class LossVariant {
  Full,   ///< sigma_t from pre-sample history, J lags, t = 1..n
  Bar,    ///< sigma_bar_t from the observed window only, t = 1..n
  Trunc,  ///< sigma_bar_t over the last floor(n^beta) time points
};

struct LossSpec {
  LossVariant variant = LossVariant::Trunc;
  double epsilon = 0.01;
  double beta = 0.799;   ///< used by Trunc only
  std::size_t J = 2000;  ///< lag truncation for Full

  /// epsilon must be > 0 except in landscape evaluation; Trunc needs 0 < beta <= 1.
  void validate(bool allow_zero_epsilon = false) const;
};

/// Where the observations live: `history` holds any pre-sample followed by the analysis
/// window, which starts at 0-based index `first`.
struct SeriesView {
  std::span<const double> history;
  std::size_t first = 0;

  [[nodiscard]] std::size_t n() const noexcept { return history.size() - first; }
  [[nodiscard]] std::span<const double> window() const { return history.subspan(first); }
  [[nodiscard]] static SeriesView observed(std::span<const double> x) { return {x, 0}; }
  [[nodiscard]] static SeriesView of(const Sample& s) { return {s.x, s.first}; }
};

/// Which past enters the conditional standard deviation at time t.
enum class PastRule {
  FinitePast,   ///< lags 1..t-1 inside the window
  FullHistory,  ///< lags 1..J reaching into the pre-sample
};

enum class Derivs { Value, Score, Hessian };

struct LossEval {
  double value = 0.0;
  Eigen::Vector3d score = Eigen::Vector3d::Zero();    ///< (d, c, a)
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
  std::size_t t_first = 0;  ///< 1-based, inclusive, window time
  std::size_t t_last = 0;
  [[nodiscard]] std::size_t count() const noexcept { return t_last - t_first + 1; }
};

/// a + sum_{j=1}^{t-1} b_j x_{t-j}; t is 1-based with 1 <= t <= len(x)+1.
[[nodiscard]] double sigma_bar(const CoeffSpec& spec, const Theta& theta, std::span<const double> x,
                               std::size_t t);

/// a + sum_{j=1}^{J} b_j x_{t-j} over the sample's extended history; t is 1-based window time.
[[nodiscard]] double sigma_full(const CoeffSpec& spec, const Theta& theta, const Sample& sample,
                                std::size_t t, std::size_t J);

/// floor(n^beta) - 1. The truncated loss averages the floor(n^beta) points t = n-m..n.
[[nodiscard]] std::size_t m_of_n(std::size_t n, double beta);

struct TimeRange {
  std::size_t first = 1;
  std::size_t last = 1;
};

/// 1-based window times averaged by the variant for a window of length n.
[[nodiscard]] TimeRange loss_range(const LossSpec& lspec, std::size_t n);

/// sigma_t(theta) for t in `range` under the given past rule.
[[nodiscard]] std::vector<double> sigma_path(const CoeffSpec& spec, const Theta& theta,
                                             const SeriesView& data, TimeRange range, PastRule rule,
                                             std::size_t J);

/// Average of l_t(theta) = (x_t^2+eps)/(sigma_t^2+eps) + ln(sigma_t^2+eps) over `range`,
/// with analytic score and Hessian when requested.
[[nodiscard]] LossEval loss_window(const CoeffSpec& spec, const Theta& theta, const SeriesView& data,
                                   TimeRange range, PastRule rule, double epsilon, std::size_t J,
                                   Derivs derivs = Derivs::Hessian);

[[nodiscard]] LossEval loss(const LossSpec& lspec, const CoeffSpec& spec, const Theta& theta,
                            const SeriesView& data, Derivs derivs = Derivs::Hessian);
[[nodiscard]] LossEval loss(const LossSpec& lspec, const CoeffSpec& spec, const Theta& theta,
                            std::span<const double> x, Derivs derivs = Derivs::Hessian);
[[nodiscard]] LossEval loss(const LossSpec& lspec, const CoeffSpec& spec, const Theta& theta,
                            const Sample& sample, Derivs derivs = Derivs::Hessian);

struct LandscapeRow {
  double epsilon = 0.0;
  double d = 0.0;
  double loss = 0.0;
};

/// Loss as a function of d with c and a held fixed, for every epsilon in `eps_list`
/// (epsilon = 0 is accepted here). Rows are grouped by epsilon in input order.
[[nodiscard]] std::vector<LandscapeRow> landscape(const LossSpec& tmpl, const CoeffSpec& spec,
                                                  double c, double a, std::span<const double> x,
                                                  std::span<const double> d_grid,
                                                  std::span<const double> eps_list);

/// Strict interior local minima of a sampled curve.
[[nodiscard]] std::size_t count_local_minima(std::span<const double> values);

/// Value-only loss for a fixed data set with the d-dependence of every lag sum
/// replaced by a Chebyshev interpolant on [d_lo, d_hi]. Agrees with `loss` to
/// roughly machine precision; each evaluation then costs O(window x nodes).
class InterpolatedLoss {
 public:
  InterpolatedLoss(const LossSpec& lspec, const CoeffSpec& spec, const SeriesView& data, double d_lo,
                   double d_hi, std::size_t nodes = 24);

  [[nodiscard]] double operator()(const Theta& theta) const;
  [[nodiscard]] TimeRange range() const noexcept { return range_; }

 private:
  double epsilon_;
  double d_lo_;
  double d_hi_;
  std::size_t nodes_;
  TimeRange range_;
  std::vector<double> x2_;    // x_t^2 per averaged t
  std::vector<double> coef_;  // Chebyshev coefficients, nodes_ per t
};

}  // namespace larch
