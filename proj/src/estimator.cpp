#include "larch/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "larch/errors.hpp"

namespace larch {

namespace {

struct Candidate {
  Theta theta;
  double value = std::numeric_limits<double>::infinity();
};

bool better(const Candidate& lhs, const Candidate& rhs) {
  return std::tie(lhs.value, lhs.theta.d, lhs.theta.c, lhs.theta.a) <
         std::tie(rhs.value, rhs.theta.d, rhs.theta.c, rhs.theta.a);
}

double get(const Theta& t, int i) { return i == 0 ? t.d : (i == 1 ? t.c : t.a); }
void set(Theta& t, int i, double v) { (i == 0 ? t.d : (i == 1 ? t.c : t.a)) = v; }

class SimplexSearch {
 public:
  SimplexSearch(const Objective& f, const ParamSpace& space, CoeffFamily family, const OptimOptions& opts,
                std::vector<int> free)
      : f_(f), space_(space), family_(family), opts_(opts), free_(std::move(free)) {}

  struct Outcome {
    Candidate best;
    int iterations = 0;
    bool converged = false;
  };

  Outcome run(const Theta& start, const std::array<double, 3>& step) {
    Outcome out;
    out.best = evaluate(start);
    if (free_.empty()) {
      out.converged = true;
      return out;
    }
    // Restart from the incumbent until a fresh simplex no longer improves it.
    double scale = 1.0;
    for (int round = 0; round < 4; ++round) {
      const double before = out.best.value;
      const auto [cand, iters, ok] = descend(out.best.theta, step, scale);
      out.iterations += iters;
      out.converged = ok;
      if (better(cand, out.best)) out.best = cand;
      if (!ok || before - out.best.value <= opts_.tol_f) break;
      scale *= 0.25;
    }
    return out;
  }

 private:
  Candidate evaluate(const Theta& raw) const {
    const Theta theta = clamp_to_space(raw, space_, family_);
    return {theta, f_(theta)};
  }

  std::tuple<Candidate, int, bool> descend(const Theta& start, const std::array<double, 3>& step, double scale) {
    const std::size_t k = free_.size();
    std::vector<Candidate> simplex;
    simplex.reserve(k + 1);
    simplex.push_back(evaluate(start));
    for (const int axis : free_) {
      Theta vertex = start;
      const double h = step[axis] * scale;
      double moved = get(start, axis) + h;
      Theta probe = vertex;
      set(probe, axis, moved);
      if (get(clamp_to_space(probe, space_, family_), axis) != moved) moved = get(start, axis) - h;
      set(vertex, axis, moved);
      simplex.push_back(evaluate(vertex));
    }

    int iter = 0;
    while (true) {
      std::sort(simplex.begin(), simplex.end(), better);
      double spread = 0.0;
      for (std::size_t v = 1; v <= k; ++v)
        for (const int axis : free_)
          spread = std::max(spread, std::abs(get(simplex[v].theta, axis) - get(simplex[0].theta, axis)));
      if (spread <= opts_.tol_x && simplex[k].value - simplex[0].value <= opts_.tol_f)
        return {simplex[0], iter, true};
      if (iter >= opts_.max_iter) return {simplex[0], iter, false};
      ++iter;

      Theta centroid = simplex[0].theta;
      for (const int axis : free_) {
        double s = 0.0;
        for (std::size_t v = 0; v < k; ++v) s += get(simplex[v].theta, axis);
        set(centroid, axis, s / static_cast<double>(k));
      }
      auto along = [&](double coeff) {
        Theta p = centroid;
        for (const int axis : free_)
          set(p, axis, get(centroid, axis) + coeff * (get(simplex[k].theta, axis) - get(centroid, axis)));
        return evaluate(p);
      };

      const Candidate reflected = along(-1.0);
      if (better(reflected, simplex[0])) {
        const Candidate expanded = along(-2.0);
        simplex[k] = better(expanded, reflected) ? expanded : reflected;
        continue;
      }
      if (better(reflected, simplex[k - 1])) {
        simplex[k] = reflected;
        continue;
      }
      const bool outside = better(reflected, simplex[k]);
      const Candidate contracted = along(outside ? -0.5 : 0.5);
      if (better(contracted, outside ? reflected : simplex[k])) {
        simplex[k] = contracted;
        continue;
      }
      for (std::size_t v = 1; v <= k; ++v) {
        Theta p = simplex[0].theta;
        for (const int axis : free_)
          set(p, axis, get(simplex[0].theta, axis) + 0.5 * (get(simplex[v].theta, axis) - get(simplex[0].theta, axis)));
        simplex[v] = evaluate(p);
      }
    }
  }

  const Objective& f_;
  const ParamSpace& space_;
  CoeffFamily family_;
  const OptimOptions& opts_;
  std::vector<int> free_;
};

std::vector<double> cell_centres(double lo, double hi, int cells) {
  std::vector<double> out(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * (i + 0.5) / cells;
  return out;
}

}  // namespace

void OptimOptions::validate() const {
  if (starts < 1) throw DomainError("optimizer needs starts >= 1");
  for (const int g : grid_dims)
    if (g < 1) throw DomainError("optimizer grid needs at least one cell per axis");
  if (!(tol_x > 0.0) || !(tol_f > 0.0)) throw DomainError("optimizer tolerances must be > 0");
  if (max_iter < 1) throw DomainError("optimizer needs max_iter >= 1");
  if (boundary_margin < 0.0) throw DomainError("boundary margin must be >= 0");
}

Theta clamp_to_space(const Theta& theta, const ParamSpace& space, CoeffFamily family) {
  Theta out = theta;
  out.d = std::clamp(theta.d, 0.0, space.d_u);
  out.c = std::clamp(theta.c, 0.0, space.c_upper(out.d, family));
  out.a = std::clamp(theta.a, space.a_d, space.a_u);
  return out;
}

bool near_boundary(const Theta& theta, const ParamSpace& space, CoeffFamily family, double margin,
                   const std::array<std::optional<double>, 3>& fixed) {
  if (!fixed[0] && (theta.d <= margin || theta.d >= space.d_u - margin)) return true;
  if (!fixed[1] && (theta.c <= margin || theta.c >= space.c_upper(theta.d, family) - margin)) return true;
  if (!fixed[2] && (theta.a <= space.a_d + margin || theta.a >= space.a_u - margin)) return true;
  return false;
}

EstimationResult minimize_box(const Objective& objective, const ParamSpace& space, const OptimOptions& opts,
                              CoeffFamily family) {
  space.validate();
  opts.validate();

  std::vector<int> free;
  for (int i = 0; i < 3; ++i)
    if (!opts.fixed[static_cast<std::size_t>(i)]) free.push_back(i);
  auto axis_values = [&](int i, int cells, double lo, double hi) {
    if (const auto& f = opts.fixed[static_cast<std::size_t>(i)]) return std::vector<double>{*f};
    return cell_centres(lo, hi, cells);
  };

  const std::vector<double> ds = axis_values(0, opts.grid_dims[0], 0.0, space.d_u);
  const std::vector<double> fracs = axis_values(1, opts.grid_dims[1], 0.0, 1.0);
  const std::vector<double> as = axis_values(2, opts.grid_dims[2], space.a_d, space.a_u);

  std::vector<Candidate> grid;
  grid.reserve(ds.size() * fracs.size() * as.size());
  for (const double d : ds) {
    const double cu = std::isfinite(space.c_upper(d, family)) ? space.c_upper(d, family) : 1.0;
    for (const double f : fracs) {
      const double c = opts.fixed[1] ? f : f * cu;
      for (const double a : as) {
        const Theta theta = clamp_to_space({d, c, a}, space, family);
        grid.push_back({theta, objective(theta)});
      }
    }
  }
  std::sort(grid.begin(), grid.end(), better);
  const std::size_t n_starts = std::min(grid.size(), static_cast<std::size_t>(opts.starts));

  std::array<double, 3> step{};
  step[0] = 0.5 * space.d_u / opts.grid_dims[0];
  step[1] = 0.5 * space.c_upper(std::min(0.25, space.d_u), family) / opts.grid_dims[1];
  step[2] = 0.5 * (space.a_u - space.a_d) / opts.grid_dims[2];

  auto run_start = [&](std::size_t s) {
    SimplexSearch search(objective, space, family, opts, free);
    return search.run(grid[s].theta, step);
  };
  std::vector<SimplexSearch::Outcome> outcomes(n_starts);
  if (opts.threads > 1 && n_starts > 1) {
    std::vector<std::future<SimplexSearch::Outcome>> futures;
    for (std::size_t s = 0; s < n_starts; ++s) futures.push_back(std::async(std::launch::async, run_start, s));
    for (std::size_t s = 0; s < n_starts; ++s) outcomes[s] = futures[s].get();
  } else {
    for (std::size_t s = 0; s < n_starts; ++s) outcomes[s] = run_start(s);
  }

  EstimationResult result;
  std::size_t winner = 0;
  for (std::size_t s = 1; s < n_starts; ++s)
    if (better(outcomes[s].best, outcomes[winner].best)) winner = s;
  result.theta_hat = outcomes[winner].best.theta;
  result.loss_at_opt = outcomes[winner].best.value;
  result.start_used = static_cast<int>(winner);
  for (const auto& o : outcomes) {
    result.iterations += o.iterations;
    result.converged = result.converged || o.converged;
  }
  result.at_boundary = near_boundary(result.theta_hat, space, family, opts.boundary_margin, opts.fixed);
  return result;
}

EstimationResult estimate(const LossSpec& lspec, const CoeffSpec& spec, const SeriesView& data,
                          const ParamSpace& space, const OptimOptions& opts) {
  lspec.validate();
  space.validate();
  opts.validate();
  const TimeRange range = loss_range(lspec, data.n());
  if (range.last - range.first + 1 < kMinEstimationWindow)
    throw DegenerateWindowError("estimation window has " + std::to_string(range.last - range.first + 1) +
                                " points, need at least " + std::to_string(kMinEstimationWindow));

  EstimationResult result;
  if (opts.exact_eval) {
    const Objective f = [&](const Theta& theta) { return loss(lspec, spec, theta, data, Derivs::Value).value; };
    result = minimize_box(f, space, opts, spec.family);
  } else {
    const double d_lo = opts.fixed[0] ? *opts.fixed[0] : 0.0;
    const double d_hi = opts.fixed[0] ? *opts.fixed[0] : space.d_u;
    const InterpolatedLoss interp(lspec, spec, data, d_lo, d_hi);
    const Objective f = [&](const Theta& theta) { return interp(theta); };
    result = minimize_box(f, space, opts, spec.family);
  }
  result.variant = lspec.variant;
  return result;
}

EstimationResult estimate(const LossSpec& lspec, const CoeffSpec& spec, std::span<const double> x,
                          const ParamSpace& space, const OptimOptions& opts) {
  return estimate(lspec, spec, SeriesView::observed(x), space, opts);
}

}  // namespace larch
