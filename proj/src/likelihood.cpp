#include "larch/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "detail/dot.hpp"
#include "larch/errors.hpp"

namespace larch {

namespace {

// Reversed unit-coefficient tables: entry k holds the value for lag L_max - k, so that
// the lag sum at time p with L lags is dot(rev + L_max - L, x + p - L, L).
struct ReversedTables {
  std::size_t length = 0;
  std::vector<double> u, du, d2u;
};

ReversedTables reversed_tables(const CoeffSpec& spec, double d, std::size_t length, int order) {
  CoeffTable table = coeff_table(spec, d, length, order);
  ReversedTables rev;
  rev.length = length;
  auto flip = [](std::vector<double>& v) { std::reverse(v.begin(), v.end()); };
  flip(table.u);
  flip(table.du);
  flip(table.d2u);
  rev.u = std::move(table.u);
  rev.du = std::move(table.du);
  rev.d2u = std::move(table.d2u);
  return rev;
}

std::size_t max_lags(TimeRange range, PastRule rule, std::size_t J) {
  return rule == PastRule::FinitePast ? range.last - 1 : J;
}

std::size_t lags_at(std::size_t t, PastRule rule, std::size_t J) {
  return rule == PastRule::FinitePast ? t - 1 : J;
}

void check_range(const SeriesView& data, TimeRange range, PastRule rule, std::size_t J) {
  const std::size_t n = data.n();
  if (range.first < 1 || range.first > range.last || range.last > n)
    throw IndexError("time range [" + std::to_string(range.first) + ", " + std::to_string(range.last) +
                     "] outside window 1.." + std::to_string(n));
  if (rule == PastRule::FullHistory) {
    if (J < 1) throw DomainError("full-history sigma needs J >= 1");
    if (data.first + range.first - 1 < J)
      throw HistoryError("full-history sigma at t = " + std::to_string(range.first) + " needs " +
                         std::to_string(J) + " lags, only " +
                         std::to_string(data.first + range.first - 1) + " available");
  }
}

}  // namespace

void LossSpec::validate(bool allow_zero_epsilon) const {
  if (!std::isfinite(epsilon) || epsilon < 0.0 || (!allow_zero_epsilon && epsilon == 0.0))
    throw DomainError("loss epsilon must be a positive constant");
  if (variant == LossVariant::Trunc && !(beta > 0.0 && beta <= 1.0))
    throw DomainError("truncated loss needs 0 < beta <= 1");
  if (variant == LossVariant::Full && J < 1) throw DomainError("full loss needs J >= 1");
}

double sigma_bar(const CoeffSpec& spec, const Theta& theta, std::span<const double> x, std::size_t t) {
  if (t < 1 || t > x.size() + 1)
    throw IndexError("sigma_bar index t = " + std::to_string(t) + " outside 1..len(x)+1");
  const ReversedTables rev = reversed_tables(spec, theta.d, t - 1, 0);
  return theta.a + theta.c * detail::dot(rev.u.data(), x.data(), t - 1);
}

double sigma_full(const CoeffSpec& spec, const Theta& theta, const Sample& sample, std::size_t t,
                  std::size_t J) {
  const SeriesView view = SeriesView::of(sample);
  check_range(view, {t, t}, PastRule::FullHistory, J);
  const std::size_t p = view.first + t - 1;
  const ReversedTables rev = reversed_tables(spec, theta.d, J, 0);
  return theta.a + theta.c * detail::dot(rev.u.data(), view.history.data() + (p - J), J);
}

std::size_t m_of_n(std::size_t n, double beta) {
  if (n < 2) throw DomainError("m(n) needs n >= 2");
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("m(n) needs 0 < beta <= 1");
  const double count = std::floor(std::pow(static_cast<double>(n), beta));
  if (count < 2.0)
    throw DegenerateWindowError("m(n) = floor(n^beta) - 1 < 1 for n = " + std::to_string(n));
  return static_cast<std::size_t>(count) - 1;
}

TimeRange loss_range(const LossSpec& lspec, std::size_t n) {
  if (n < 1) throw DegenerateWindowError("empty observation window");
  if (lspec.variant != LossVariant::Trunc) return {1, n};
  const std::size_t m = m_of_n(n, lspec.beta);
  return {n - m, n};
}

std::vector<double> sigma_path(const CoeffSpec& spec, const Theta& theta, const SeriesView& data,
                               TimeRange range, PastRule rule, std::size_t J) {
  check_range(data, range, rule, J);
  const std::size_t lmax = max_lags(range, rule, J);
  const ReversedTables rev = reversed_tables(spec, theta.d, lmax, 0);
  const double* hist = data.history.data();
  std::vector<double> out;
  out.reserve(range.last - range.first + 1);
  for (std::size_t t = range.first; t <= range.last; ++t) {
    const std::size_t L = lags_at(t, rule, J);
    const std::size_t p = data.first + t - 1;
    out.push_back(theta.a + theta.c * detail::dot(rev.u.data() + (lmax - L), hist + (p - L), L));
  }
  return out;
}

LossEval loss_window(const CoeffSpec& spec, const Theta& theta, const SeriesView& data, TimeRange range,
                     PastRule rule, double epsilon, std::size_t J, Derivs derivs) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw DomainError("loss epsilon must be finite and >= 0");
  if (!theta.finite()) throw DomainError("loss needs a finite theta");
  check_range(data, range, rule, J);

  const int order = derivs == Derivs::Value ? 0 : (derivs == Derivs::Score ? 1 : 2);
  if (order == 2 && spec.family != CoeffFamily::PowerLaw)
    throw UnsupportedError("analytic Hessian needs second d-derivatives, available for PowerLaw only");

  const std::size_t lmax = max_lags(range, rule, J);
  const ReversedTables rev = reversed_tables(spec, theta.d, lmax, order);
  const double* hist = data.history.data();
  const double c = theta.c;

  detail::CompensatedSum value;
  std::array<detail::CompensatedSum, 3> score;
  std::array<detail::CompensatedSum, 6> hess;  // dd, dc, da, cc, ca, aa

  for (std::size_t t = range.first; t <= range.last; ++t) {
    const std::size_t L = lags_at(t, rule, J);
    const std::size_t p = data.first + t - 1;
    const double* xs = hist + (p - L);
    const std::size_t off = lmax - L;

    const double s0 = detail::dot(rev.u.data() + off, xs, L);
    const double sigma = theta.a + c * s0;
    const double x2 = hist[p] * hist[p];
    const double v = sigma * sigma + epsilon;
    const double ratio = (x2 + epsilon) / v;
    const double term = ratio + std::log(v);
    if (!std::isfinite(term))
      throw NumericError("non-finite loss term at t = " + std::to_string(t), t);
    value.add(term);
    if (order == 0) continue;

    const double s1 = detail::dot(rev.du.data() + off, xs, L);
    const Eigen::Vector3d sdot(c * s1, s0, 1.0);
    const double w1 = (1.0 - ratio) * 2.0 * sigma / v;
    for (int i = 0; i < 3; ++i) score[i].add(w1 * sdot[i]);
    if (order == 1) continue;

    const double s2 = detail::dot(rev.d2u.data() + off, xs, L);
    const double outer_w = 4.0 * sigma * sigma / (v * v) * (2.0 * ratio - 1.0) + 2.0 / v * (1.0 - ratio);
    const double curv_w = 2.0 / v * (1.0 - ratio) * sigma;
    // sigma's second derivatives: dd = c s2, dc = s1, all others zero.
    hess[0].add(outer_w * sdot[0] * sdot[0] + curv_w * c * s2);
    hess[1].add(outer_w * sdot[0] * sdot[1] + curv_w * s1);
    hess[2].add(outer_w * sdot[0] * sdot[2]);
    hess[3].add(outer_w * sdot[1] * sdot[1]);
    hess[4].add(outer_w * sdot[1] * sdot[2]);
    hess[5].add(outer_w * sdot[2] * sdot[2]);
  }

  LossEval out;
  out.t_first = range.first;
  out.t_last = range.last;
  const double inv = 1.0 / static_cast<double>(out.count());
  out.value = value.value() * inv;
  if (order >= 1)
    for (int i = 0; i < 3; ++i) out.score[i] = score[i].value() * inv;
  if (order >= 2) {
    const double dd = hess[0].value() * inv, dc = hess[1].value() * inv, da = hess[2].value() * inv;
    const double cc = hess[3].value() * inv, ca = hess[4].value() * inv, aa = hess[5].value() * inv;
    out.hessian << dd, dc, da, dc, cc, ca, da, ca, aa;
  }
  return out;
}

LossEval loss(const LossSpec& lspec, const CoeffSpec& spec, const Theta& theta, const SeriesView& data,
              Derivs derivs) {
  lspec.validate();
  const TimeRange range = loss_range(lspec, data.n());
  const PastRule rule = lspec.variant == LossVariant::Full ? PastRule::FullHistory : PastRule::FinitePast;
  // The finite-past variants see the observed window only.
  const SeriesView view = rule == PastRule::FullHistory ? data : SeriesView::observed(data.window());
  return loss_window(spec, theta, view, range, rule, lspec.epsilon, lspec.J, derivs);
}

LossEval loss(const LossSpec& lspec, const CoeffSpec& spec, const Theta& theta, std::span<const double> x,
              Derivs derivs) {
  return loss(lspec, spec, theta, SeriesView::observed(x), derivs);
}

LossEval loss(const LossSpec& lspec, const CoeffSpec& spec, const Theta& theta, const Sample& sample,
              Derivs derivs) {
  return loss(lspec, spec, theta, SeriesView::of(sample), derivs);
}

std::vector<LandscapeRow> landscape(const LossSpec& tmpl, const CoeffSpec& spec, double c, double a,
                                    std::span<const double> x, std::span<const double> d_grid,
                                    std::span<const double> eps_list) {
  if (d_grid.empty() || eps_list.empty()) throw DomainError("landscape needs a non-empty grid");
  for (const double e : eps_list) {
    LossSpec probe = tmpl;
    probe.epsilon = e;
    probe.validate(/*allow_zero_epsilon=*/true);
  }
  const SeriesView view = SeriesView::observed(x);
  const TimeRange range = loss_range(tmpl, view.n());
  const PastRule rule = tmpl.variant == LossVariant::Full ? PastRule::FullHistory : PastRule::FinitePast;

  std::vector<std::vector<double>> sigmas;
  sigmas.reserve(d_grid.size());
  for (const double d : d_grid) sigmas.push_back(sigma_path(spec, Theta{d, c, a}, view, range, rule, tmpl.J));

  std::vector<LandscapeRow> rows;
  rows.reserve(d_grid.size() * eps_list.size());
  for (const double e : eps_list) {
    for (std::size_t g = 0; g < d_grid.size(); ++g) {
      detail::CompensatedSum sum;
      for (std::size_t i = 0; i < sigmas[g].size(); ++i) {
        const double xt = x[range.first - 1 + i];
        const double v = sigmas[g][i] * sigmas[g][i] + e;
        sum.add((xt * xt + e) / v + std::log(v));
      }
      rows.push_back({e, d_grid[g], sum.value() / static_cast<double>(sigmas[g].size())});
    }
  }
  return rows;
}

std::size_t count_local_minima(std::span<const double> values) {
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    if (values[i] < values[i - 1] && values[i] < values[i + 1]) ++count;
  return count;
}

InterpolatedLoss::InterpolatedLoss(const LossSpec& lspec, const CoeffSpec& spec, const SeriesView& data,
                                   double d_lo, double d_hi, std::size_t nodes)
    : epsilon_(lspec.epsilon), d_lo_(d_lo), d_hi_(d_hi), nodes_(nodes) {
  lspec.validate();
  if (!(d_lo >= 0.0 && d_hi >= d_lo && d_hi < 0.5)) throw DomainError("interpolation needs 0 <= d_lo <= d_hi < 1/2");
  if (nodes_ < 2) throw DomainError("interpolation needs at least two nodes");
  range_ = loss_range(lspec, data.n());
  const PastRule rule = lspec.variant == LossVariant::Full ? PastRule::FullHistory : PastRule::FinitePast;
  const SeriesView view = rule == PastRule::FullHistory ? data : SeriesView::observed(data.window());
  check_range(view, range_, rule, lspec.J);

  const std::size_t count = range_.last - range_.first + 1;
  x2_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double xt = view.history[view.first + range_.first - 1 + i];
    x2_[i] = xt * xt;
  }
  if (d_hi_ - d_lo_ < 1e-14) nodes_ = 1;

  // Lag sums at the Chebyshev nodes, node-major.
  const double mid = 0.5 * (d_lo_ + d_hi_);
  const double half = 0.5 * (d_hi_ - d_lo_);
  const std::size_t K = nodes_;
  const std::size_t lmax = max_lags(range_, rule, lspec.J);
  const double* hist = view.history.data();
  std::vector<double> at_nodes(K * count);
  for (std::size_t k = 0; k < K; ++k) {
    const double y = K == 1 ? 0.0 : std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(K));
    const ReversedTables rev = reversed_tables(spec, mid + half * y, lmax, 0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t t = range_.first + i;
      const std::size_t L = lags_at(t, rule, lspec.J);
      const std::size_t p = view.first + t - 1;
      at_nodes[k * count + i] = detail::dot(rev.u.data() + (lmax - L), hist + (p - L), L);
    }
  }

  coef_.assign(K * count, 0.0);
  if (K == 1) {
    coef_ = std::move(at_nodes);
    return;
  }
  std::vector<double> basis(K * K);
  for (std::size_t m = 0; m < K; ++m)
    for (std::size_t k = 0; k < K; ++k)
      basis[m * K + k] = std::cos(std::numbers::pi * static_cast<double>(m) * (static_cast<double>(k) + 0.5) /
                                  static_cast<double>(K));
  const double scale = 2.0 / static_cast<double>(K);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t m = 0; m < K; ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < K; ++k) acc += basis[m * K + k] * at_nodes[k * count + i];
      coef_[i * K + m] = scale * acc * (m == 0 ? 0.5 : 1.0);
    }
  }
}

double InterpolatedLoss::operator()(const Theta& theta) const {
  const double tol = 1e-12;
  if (theta.d < d_lo_ - tol || theta.d > d_hi_ + tol)
    throw DomainError("interpolated loss evaluated outside its d interval");
  const std::size_t K = nodes_;
  const double half = 0.5 * (d_hi_ - d_lo_);
  const double y = K == 1 ? 0.0 : std::clamp((theta.d - 0.5 * (d_lo_ + d_hi_)) / half, -1.0, 1.0);
  const double two_y = 2.0 * y;

  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < x2_.size(); ++i) {
    const double* c = coef_.data() + i * K;
    double s0;
    if (K == 1) {
      s0 = c[0];
    } else {
      double b1 = 0.0, b2 = 0.0;
      for (std::size_t m = K - 1; m >= 1; --m) {
        const double b0 = two_y * b1 - b2 + c[m];
        b2 = b1;
        b1 = b0;
      }
      s0 = c[0] + y * b1 - b2;
    }
    const double sigma = theta.a + theta.c * s0;
    const double v = sigma * sigma + epsilon_;
    sum.add((x2_[i] + epsilon_) / v + std::log(v));
  }
  return sum.value() / static_cast<double>(x2_.size());
}

}  // namespace larch
