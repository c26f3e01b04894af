#include "larch/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "larch/errors.hpp"
#include "larch/likelihood.hpp"
#include "larch/simulator.hpp"

namespace larch {

DecayFit fit_decay(std::span<const double> k, std::span<const double> value, double k_min, double k_max) {
  if (k.size() != value.size()) throw DomainError("fit_decay needs equally long lag and value sequences");
  std::vector<double> lx, ly;
  DecayFit fit;
  fit.k_min = k_max;
  fit.k_max = k_min;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i] >= k_min && k[i] <= k_max) || !(k[i] > 0.0) || !(value[i] > 0.0)) continue;
    if (!std::isfinite(value[i])) continue;
    lx.push_back(std::log(k[i]));
    ly.push_back(std::log(value[i]));
    fit.k_min = std::min(fit.k_min, k[i]);
    fit.k_max = std::max(fit.k_max, k[i]);
  }
  if (lx.size() < 5)
    throw InsufficientDataError("decay fit needs at least 5 positive pairs in range, got " +
                                std::to_string(lx.size()));
  const double N = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= N;
  my /= N;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("decay fit needs at least two distinct lags");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.points = lx.size();
  return fit;
}

ScoreGap score_gap(const CoeffSpec& spec, const Theta& theta0, double epsilon, std::size_t n, double beta,
                   const ScoreGapSettings& settings) {
  if (settings.replicates < 1) throw DomainError("score_gap needs at least one replicate");
  if (settings.burn_in < settings.J) throw HistoryError("score_gap needs burn_in >= J for full-history sigma");
  if (settings.J < n)
    throw DomainError("score_gap needs J >= n so the full-history sigma reaches before the window");
  LossSpec lspec;
  lspec.variant = LossVariant::Trunc;
  lspec.epsilon = epsilon;
  lspec.beta = beta;
  lspec.J = settings.J;
  lspec.validate();

  ScoreGap out;
  out.predicted = predicted_rate(n, beta, theta0.d);
  const TimeRange range = loss_range(lspec, n);
  out.window = range.last - range.first + 1;
  const double scale = std::sqrt(static_cast<double>(out.window));

  std::vector<double> gap_d(settings.replicates), gap_norm(settings.replicates);
  auto run = [&](std::size_t r) {
    SimConfig cfg;
    cfg.n = n;
    cfg.burn_in = settings.burn_in;
    cfg.J = settings.J;
    cfg.seed = derive_seed(settings.base_seed, r);
    const Sample sample = simulate(spec, theta0, cfg);
    const SeriesView view = SeriesView::of(sample);
    const LossEval full =
        loss_window(spec, theta0, view, range, PastRule::FullHistory, epsilon, settings.J, Derivs::Score);
    const LossEval bar =
        loss_window(spec, theta0, view, range, PastRule::FinitePast, epsilon, settings.J, Derivs::Score);
    const Eigen::Vector3d diff = full.score - bar.score;
    gap_d[r] = scale * std::abs(diff[0]);
    gap_norm[r] = scale * diff.norm();
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(settings.threads, static_cast<unsigned>(settings.replicates)));
  if (workers == 1) {
    for (std::size_t r = 0; r < settings.replicates; ++r) run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = next.fetch_add(1); r < settings.replicates; r = next.fetch_add(1)) run(r);
        } catch (...) {
          errors[w] = std::current_exception();
          next = settings.replicates;
        }
      });
    pool.clear();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const double R = static_cast<double>(settings.replicates);
  double sum = 0.0, sum_norm = 0.0;
  for (std::size_t r = 0; r < settings.replicates; ++r) {
    sum += gap_d[r];
    sum_norm += gap_norm[r];
  }
  out.mean_abs = sum / R;
  out.mean_norm = sum_norm / R;
  if (settings.replicates > 1) {
    double ss = 0.0;
    for (const double g : gap_d) ss += (g - out.mean_abs) * (g - out.mean_abs);
    out.std_error = std::sqrt(ss / (R - 1.0) / R);
  }
  return out;
}

}  // namespace larch
