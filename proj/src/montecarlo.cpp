#include "larch/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "detail/dot.hpp"
#include "larch/errors.hpp"
#include "larch/likelihood.hpp"
#include "larch/simulator.hpp"

namespace larch {

void StudyConfig::validate() const {
  if (replicates < 1) throw DomainError("study needs at least one replicate");
  if (trim >= replicates) throw DomainError("trim count must be smaller than the replicate count");
  if (ns.empty()) throw DomainError("study needs at least one sample size");
  if (!(epsilon > 0.0)) throw DomainError("study needs epsilon > 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("study needs 0 < beta <= 1");
  space.check(theta0, spec.family);
  if (!free[0] && !free[1] && !free[2]) throw DomainError("study needs at least one estimated parameter");
  optim.validate();
}

StudyConfig case_preset(int case_number) {
  StudyConfig cfg;
  cfg.ns = {1000, 2500, 5000, 10000};
  cfg.replicates = 1000;
  cfg.epsilon = 0.01;
  cfg.free = {true, false, false};
  if (case_number == 1) {
    cfg.label = "case1";
    cfg.theta0 = {0.1, 0.2, 1.0};
    cfg.beta = 0.799;
  } else if (case_number == 2) {
    cfg.label = "case2";
    cfg.theta0 = {0.2, 0.2, 1.0};
    cfg.beta = 0.599;
  } else {
    throw DomainError("unknown simulation case " + std::to_string(case_number) + " (expected 1 or 2)");
  }
  return cfg;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InsufficientDataError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double pos = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summary_stats(std::span<const double> values, std::size_t n, double beta) {
  if (values.empty()) throw InsufficientDataError("summary of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double N = static_cast<double>(v.size());

  SummaryStats st;
  st.count = v.size();
  st.median = quantile_sorted(v, 0.5);
  const double scale = std::pow(static_cast<double>(n), beta / 2.0);

  detail::CompensatedSum sum;
  for (const double x : v) sum.add(x);
  st.mean = sum.value() / N;

  if (v.front() == v.back()) {
    st.mean = v.front();
    return st;  // s = s_tilde = 0, skewness and q-skewness undefined
  }

  double m2 = 0.0, m3 = 0.0;
  for (const double x : v) {
    const double dev = x - st.mean;
    m2 += dev * dev;
    m3 += dev * dev * dev;
  }
  st.s = v.size() > 1 ? std::sqrt(m2 / (N - 1.0)) : 0.0;
  m2 /= N;
  m3 /= N;
  if (m2 > 0.0) st.skewness = m3 / std::pow(m2, 1.5);

  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - st.median);
  std::sort(dev.begin(), dev.end());
  st.s_tilde = quantile_sorted(dev, 0.5) / kMadScale;

  st.scaled_s = scale * st.s;
  st.scaled_s_tilde = scale * st.s_tilde;

  const double q1 = quantile_sorted(v, 0.25);
  const double q2 = st.median;
  const double q3 = quantile_sorted(v, 0.75);
  if (q3 > q1) st.q_skewness = ((q3 - q2) - (q2 - q1)) / (q3 - q1);
  return st;
}

SummaryRecord summarize(std::span<const double> values, std::size_t n, double beta, std::size_t trim_k) {
  if (values.size() < 4) throw InsufficientDataError("summaries need at least 4 values");
  if (values.size() < trim_k + 4) throw InsufficientDataError("trimming leaves fewer than 4 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SummaryRecord rec;
  rec.all = summary_stats(sorted, n, beta);
  rec.trimmed = summary_stats(std::span(sorted).subspan(trim_k), n, beta);
  return rec;
}

std::vector<NSummary> summarize_rows(std::span<const ReplicateRow> rows, double beta, std::size_t trim) {
  std::vector<std::size_t> ns;
  for (const auto& r : rows)
    if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);

  std::vector<NSummary> out;
  for (const std::size_t n : ns) {
    NSummary s;
    s.n = n;
    std::vector<double> d_hat;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (r.at_boundary) ++s.boundary_hits;
      if (!r.converged) ++s.non_converged;
      if (std::isfinite(r.theta_hat.d)) d_hat.push_back(r.theta_hat.d);
    }
    if (d_hat.size() >= trim + 4) s.d_hat = summarize(d_hat, n, beta, trim);
    out.push_back(s);
  }
  return out;
}

McReport run_study(const StudyConfig& cfg) {
  cfg.validate();
  LossSpec lspec;
  lspec.variant = LossVariant::Trunc;
  lspec.epsilon = cfg.epsilon;
  lspec.beta = cfg.beta;
  lspec.J = cfg.J;
  OptimOptions optim = cfg.optim;
  optim.threads = 1;
  const double at[] = {cfg.theta0.d, cfg.theta0.c, cfg.theta0.a};
  for (std::size_t i = 0; i < 3; ++i)
    if (!cfg.free[i]) optim.fixed[i] = at[i];

  const std::size_t tasks = cfg.ns.size() * cfg.replicates;
  std::vector<ReplicateRow> rows(tasks);
  auto run_task = [&](std::size_t task) {
    const std::size_t n = cfg.ns[task / cfg.replicates];
    const std::size_t r = task % cfg.replicates;
    ReplicateRow& row = rows[task];
    row.n = n;
    row.replicate = r;
    row.seed = derive_seed(cfg.base_seed, r);
    SimConfig sim;
    sim.n = n;
    sim.burn_in = cfg.burn_in;
    sim.J = cfg.J;
    sim.seed = row.seed;
    try {
      const Sample sample = simulate(cfg.spec, cfg.theta0, sim, cfg.space);
      const EstimationResult est = estimate(lspec, cfg.spec, SeriesView::of(sample), cfg.space, optim);
      row.theta_hat = est.theta_hat;
      row.loss = est.loss_at_opt;
      row.converged = est.converged;
      row.at_boundary = est.at_boundary;
    } catch (const Error&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.theta_hat = {nan, nan, nan};
      row.loss = nan;
      row.converged = false;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(tasks)));
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
          try {
            run_task(t);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  McReport report;
  report.label = cfg.label;
  report.beta = cfg.beta;
  report.trim = cfg.trim;
  report.rows = std::move(rows);
  report.summaries = summarize_rows(report.rows, cfg.beta, cfg.trim);
  return report;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::vector<std::pair<double, double>> normal_plot_data(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientDataError("normal plot needs at least 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double N = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    out.emplace_back(normal_quantile((static_cast<double>(i) + 0.5) / N), sorted[i]);
  return out;
}

std::optional<std::vector<double>> acf(std::span<const double> x, std::size_t max_lag, bool on_squares) {
  if (max_lag >= x.size()) throw DomainError("acf needs max_lag < series length");
  std::vector<double> y(x.begin(), x.end());
  if (on_squares)
    for (double& v : y) v *= v;
  detail::CompensatedSum sum;
  for (const double v : y) sum.add(v);
  const double mean = sum.value() / static_cast<double>(y.size());
  for (double& v : y) v -= mean;
  const double denom = detail::dot(y.data(), y.data(), y.size());
  if (!(denom > 0.0)) return std::nullopt;
  std::vector<double> rho(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) rho[k] = detail::dot(y.data(), y.data() + k, y.size() - k) / denom;
  return rho;
}

}  // namespace larch
