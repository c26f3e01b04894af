#include "larch/simulator.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "detail/dot.hpp"
#include "larch/errors.hpp"

namespace larch {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// b_{J-k} at index k, so the lag sum becomes a forward dot product.
std::vector<double> reversed_coefficients(const CoeffSpec& spec, const Theta& theta, std::size_t J) {
  const CoeffTable table = coeff_table(spec, theta.d, J);
  std::vector<double> rev(J);
  for (std::size_t k = 0; k < J; ++k) rev[k] = theta.c * table.u[J - 1 - k];
  return rev;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 1) throw DomainError("simulation needs n >= 1");
  if (J < 1) throw DomainError("simulation needs truncation J >= 1");
  if (noise.kind == NoiseKind::Table && noise.table.empty())
    throw DomainError("table noise needs a non-empty table");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(base ^ splitmix64(stream));
}

std::vector<double> draw_innovations(const NoiseSpec& noise, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::vector<double> eps(count);
  if (noise.kind == NoiseKind::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& e : eps) e = normal(engine);
  } else {
    if (noise.table.empty()) throw DomainError("table noise needs a non-empty table");
    std::uniform_int_distribution<std::size_t> pick(0, noise.table.size() - 1);
    for (double& e : eps) e = noise.table[pick(engine)];
  }
  return eps;
}

Sample simulate_from_innovations(const CoeffSpec& spec, const Theta& theta0, std::vector<double> eps,
                                 std::size_t burn_in, std::size_t J) {
  if (J < 1) throw DomainError("simulation needs truncation J >= 1");
  if (eps.size() <= burn_in) throw DomainError("innovation sequence shorter than burn-in + 1");
  const std::size_t total = eps.size();
  const std::vector<double> rev = reversed_coefficients(spec, theta0, J);

  Sample sample;
  sample.x.resize(total);
  sample.sigma.resize(total);
  sample.eps = std::move(eps);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t lags = std::min(J, i);
    const double s = theta0.a + detail::dot(rev.data() + (J - lags), sample.x.data() + (i - lags), lags);
    sample.sigma[i] = s;
    sample.x[i] = sample.eps[i] * s;
  }
  sample.spec = spec;
  sample.theta0 = theta0;
  sample.first = burn_in;
  sample.config.n = total - burn_in;
  sample.config.burn_in = burn_in;
  sample.config.J = J;
  return sample;
}

Sample simulate(const CoeffSpec& spec, const Theta& theta0, const SimConfig& cfg, const ParamSpace& space) {
  cfg.validate();
  space.check(theta0, spec.family);
  if (norm_p(spec, theta0, 2.0) >= 1.0) throw ValidationError("sum of squared coefficients must be < 1");
  Sample sample = simulate_from_innovations(
      spec, theta0, draw_innovations(cfg.noise, cfg.burn_in + cfg.n, cfg.seed), cfg.burn_in, cfg.J);
  sample.config = cfg;
  return sample;
}

std::vector<double> volterra_orders(const CoeffSpec& spec, const Theta& theta0,
                                    std::span<const double> eps_prefix, std::size_t t,
                                    std::size_t K_max, std::size_t J, std::uint64_t budget) {
  if (K_max < 1) throw DomainError("volterra expansion needs K_max >= 1");
  if (t < 1 || t > eps_prefix.size() + 1)
    throw IndexError("volterra index t = " + std::to_string(t) + " outside 1..len(eps)+1");
  const std::size_t past = t - 1;
  const std::size_t depth = std::min(K_max, past);
  const std::size_t max_lag = std::min(J, std::max<std::size_t>(past, 1));

  // Each order costs at most (t-1) positions times max_lag chain extensions.
  const double work = static_cast<double>(depth) * static_cast<double>(past) * static_cast<double>(max_lag);
  if (work > static_cast<double>(budget))
    throw BudgetError("volterra expansion needs ~" + std::to_string(static_cast<long long>(work)) +
                      " chain extensions, budget is " + std::to_string(budget));

  std::vector<double> b(max_lag + 1, 0.0);
  const CoeffTable table = coeff_table(spec, theta0.d, max_lag);
  for (std::size_t j = 1; j <= max_lag; ++j) b[j] = theta0.c * table.u[j - 1];

  // level[s-1]: sum over chains of the current depth whose top element is s.
  std::vector<double> level(eps_prefix.begin(), eps_prefix.begin() + static_cast<std::ptrdiff_t>(past));
  std::vector<double> next(past, 0.0);
  std::vector<double> orders(K_max, 0.0);
  for (std::size_t k = 1; k <= depth; ++k) {
    double contribution = 0.0;
    for (std::size_t s = (t > J ? t - J : 1); s < t; ++s) contribution += b[t - s] * level[s - 1];
    orders[k - 1] = theta0.a * contribution;
    if (k == depth) break;
    for (std::size_t s = 1; s <= past; ++s) {
      double acc = 0.0;
      for (std::size_t r = (s > J ? s - J : 1); r < s; ++r) acc += b[s - r] * level[r - 1];
      next[s - 1] = eps_prefix[s - 1] * acc;
    }
    std::swap(level, next);
  }
  return orders;
}

double volterra_sigma(const CoeffSpec& spec, const Theta& theta0, std::span<const double> eps_prefix,
                      std::size_t t, std::size_t K_max, std::size_t J, std::uint64_t budget) {
  const std::vector<double> orders = volterra_orders(spec, theta0, eps_prefix, t, K_max, J, budget);
  double sigma = theta0.a;
  for (const double o : orders) sigma += o;
  return sigma;
}

}  // namespace larch
