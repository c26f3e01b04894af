#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>

#include "larch/coeff_model.hpp"
#include "larch/likelihood.hpp"

namespace larch {

struct OptimOptions {
  int starts = 5;
  std::array<int, 3> grid_dims{9, 9, 9};  ///< coarse grid cells along d, c/c_u(d), a
  double tol_x = 1e-5;
  double tol_f = 1e-9;
  int max_iter = 2000;
  double boundary_margin = 1e-4;
  /// Coordinates (d, c, a) held at a fixed value instead of optimized.
  std::array<std::optional<double>, 3> fixed{};
  /// Evaluate the exact loss at every step instead of the interpolated one.
  bool exact_eval = false;
  /// Worker threads for the multi-start phase.
  unsigned threads = 1;

  void validate() const;
};

struct EstimationResult {
  Theta theta_hat;
  double loss_at_opt = 0.0;
  int iterations = 0;
  bool converged = false;
  bool at_boundary = false;
  int start_used = -1;
  LossVariant variant = LossVariant::Trunc;
};

using Objective = std::function<double(const Theta&)>;

/// Projects theta onto the closed box: d into [0, d_u], then c into [0, c_u(d)],
/// then a into [a_d, a_u].
[[nodiscard]] Theta clamp_to_space(const Theta& theta, const ParamSpace& space, CoeffFamily family);

/// True when any free coordinate lies within `margin` of a face of the box.
[[nodiscard]] bool near_boundary(const Theta& theta, const ParamSpace& space, CoeffFamily family,
                                 double margin, const std::array<std::optional<double>, 3>& fixed = {});

/// Coarse grid search followed by Nelder-Mead descents from the best `starts` grid
/// cells; every trial point is clamped into the box. Deterministic; ties between
/// final values go to the smallest d, then c, then a.
[[nodiscard]] EstimationResult minimize_box(const Objective& objective, const ParamSpace& space,
                                            const OptimOptions& opts,
                                            CoeffFamily family = CoeffFamily::PowerLaw);

/// Fewest summands any estimation window may have.
inline constexpr std::size_t kMinEstimationWindow = 10;

[[nodiscard]] EstimationResult estimate(const LossSpec& lspec, const CoeffSpec& spec,
                                        const SeriesView& data, const ParamSpace& space,
                                        const OptimOptions& opts);
[[nodiscard]] EstimationResult estimate(const LossSpec& lspec, const CoeffSpec& spec,
                                        std::span<const double> x, const ParamSpace& space,
                                        const OptimOptions& opts);

}  // namespace larch
