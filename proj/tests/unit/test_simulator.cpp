#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "larch/coeff_model.hpp"
#include "larch/errors.hpp"
#include "larch/montecarlo.hpp"
#include "larch/simulator.hpp"
#include "oracles.hpp"

using namespace larch;

namespace {

const CoeffSpec kPower{};
const Theta kCase1{0.1, 0.2, 1.0};
const Theta kCase2{0.2, 0.2, 1.0};

SimConfig config(std::size_t n, std::uint64_t seed, std::size_t burn_in = 10000) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.burn_in = burn_in;
  return cfg;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("zero scale gives i.i.d. noise times a") {
  const Sample s = simulate(kPower, {0.2, 0.0, 1.7}, config(500, 4, 100));
  REQUIRE(s.x.size() == 600);
  REQUIRE(s.first == 100);
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    CHECK(s.sigma[i] == 1.7);
    CHECK(s.x[i] == 1.7 * s.eps[i]);
  }
}

TEST_CASE("paths are deterministic and satisfy x = eps * sigma") {
  const Sample a = simulate(kPower, kCase1, config(2000, 77));
  const Sample b = simulate(kPower, kCase1, config(2000, 77));
  const Sample c = simulate(kPower, kCase1, config(2000, 78));
  CHECK(a.x == b.x);
  CHECK(a.sigma == b.sigma);
  CHECK(a.x != c.x);
  CHECK(a.n() == 2000);
  CHECK(a.window_x().size() == 2000);
  for (std::size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == a.eps[i] * a.sigma[i]);
  CHECK(a.sigma[0] == kCase1.a);
}

TEST_CASE("recursion definition with truncation J") {
  const Sample s = simulate_from_innovations(kPower, kCase2, draw_innovations({}, 300, 5), 0, 25);
  for (std::size_t t : {1UL, 2UL, 10UL, 26UL, 27UL, 299UL}) {
    double sigma = kCase2.a;
    for (std::size_t j = 1; j <= std::min<std::size_t>(25, t); ++j) sigma += coeff(kPower, kCase2, static_cast<long>(j)) * s.x[t - j];
    CHECK(s.sigma[t] == doctest::Approx(sigma).epsilon(1e-13));
  }
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(derive_seed(42, r));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(42, 3) != derive_seed(43, 3));
}

TEST_CASE("table innovations are resampled from the table") {
  NoiseSpec noise{NoiseKind::Table, {-1.0, 1.0}};
  const std::vector<double> e = draw_innovations(noise, 1000, 3);
  for (const double v : e) CHECK(std::abs(v) == 1.0);
  CHECK(std::count(e.begin(), e.end(), 1.0) > 400);
  CHECK_THROWS_AS((void)draw_innovations({NoiseKind::Table, {}}, 3, 1), DomainError);
}

TEST_CASE("Volterra expansion reproduces the recursion") {
  SUBCASE("t = 1 is the intercept") {
    const std::vector<double> eps{0.3, -1.2};
    CHECK(volterra_sigma(kPower, kCase1, eps, 1, 5) == kCase1.a);
  }
  SUBCASE("first order term") {
    const std::vector<double> eps = draw_innovations({}, 20, 9);
    const std::vector<double> orders = volterra_orders(kPower, kCase1, eps, 21, 1);
    double first = 0.0;
    for (long j = 1; j <= 20; ++j) first += coeff(kPower, kCase1, j) * eps[static_cast<std::size_t>(20 - j)];
    CHECK(orders.at(0) == doctest::Approx(kCase1.a * first).epsilon(1e-14));
  }
  SUBCASE("agreement with brute-force chain enumeration") {
    const std::vector<double> eps = draw_innovations({}, 16, 21);
    const auto b = [&](long j) { return coeff(kPower, kCase2, j); };
    for (long t : {2L, 5L, 12L, 17L}) {
      const double brute = oracle::volterra_chains(b, eps, kCase2.a, t);
      CHECK(volterra_sigma(kPower, kCase2, eps, static_cast<std::size_t>(t), 64) == doctest::Approx(brute).epsilon(1e-13));
    }
  }
  SUBCASE("full depth equals the empty-past recursion at t = 30") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      const std::vector<double> eps = draw_innovations({}, 30, seed);
      const Sample s = simulate_from_innovations(kPower, kCase1, eps, 0, 2000);
      CHECK(std::abs(volterra_sigma(kPower, kCase1, eps, 30, 29) - s.sigma[29]) < 1e-10);
    }
  }
  SUBCASE("lag truncation is honoured") {
    const std::vector<double> eps = draw_innovations({}, 40, 8);
    const Sample s = simulate_from_innovations(kPower, kCase2, eps, 0, 5);
    CHECK(std::abs(volterra_sigma(kPower, kCase2, eps, 40, 39, 5) - s.sigma[39]) < 1e-12);
  }
  SUBCASE("orders shrink geometrically") {
    const std::vector<double> eps = draw_innovations({}, 50, 4);
    const std::vector<double> orders = volterra_orders(kPower, kCase1, eps, 51, 49);
    double early = 0, late = 0;
    for (std::size_t k = 0; k < 5; ++k) early += std::abs(orders[k]);
    for (std::size_t k = 30; k < 49; ++k) late += std::abs(orders[k]);
    CHECK(late < 1e-6 * early);
  }
  SUBCASE("errors") {
    const std::vector<double> eps = draw_innovations({}, 3000, 1);
    CHECK_THROWS_AS((void)volterra_sigma(kPower, kCase1, eps, 3001, 3000), BudgetError);
    CHECK_NOTHROW((void)volterra_sigma(kPower, kCase1, eps, 3001, 3000, 2000, 100'000'000'000ULL));
    CHECK_THROWS_AS((void)volterra_sigma(kPower, kCase1, eps, 3002, 3), IndexError);
    CHECK_THROWS_AS((void)volterra_sigma(kPower, kCase1, eps, 0, 3), IndexError);
    CHECK_THROWS_AS((void)volterra_sigma(kPower, kCase1, eps, 5, 0), DomainError);
  }
}

TEST_CASE("stationary moments") {
  SUBCASE("x has mean zero and is uncorrelated") {
    const Sample s = simulate(kPower, kCase1, config(100000, 11));
    const std::vector<double> x(s.window_x().begin(), s.window_x().end());
    CHECK(std::abs(mean(x)) < 4 * sd(x) / std::sqrt(static_cast<double>(x.size())));
    const auto rho = acf(std::span<const double>(x).first(50000), 5, false);
    REQUIRE(rho);
    for (std::size_t k = 1; k <= 5; ++k) CHECK(std::abs((*rho)[k]) < 3 / std::sqrt(50000.0));
  }
  SUBCASE("squares are positively correlated for d = 0.2") {
    const Sample s = simulate(kPower, kCase2, config(50000, 12));
    const auto rho = acf(s.window_x(), 50, true);
    REQUIRE(rho);
    double m = 0;
    for (std::size_t k = 1; k <= 50; ++k) m += (*rho)[k] / 50;
    CHECK(m > 0.0);
  }
  SUBCASE("E x^2 = a^2 / (1 - |b|^2) and burn-in insensitivity") {
    // replicate means of x^2 for two burn-in lengths
    std::vector<double> m10, m20;
    for (std::uint64_t r = 0; r < 40; ++r) {
      for (const std::size_t burn : {10000UL, 20000UL}) {
        const Sample s = simulate(kPower, kCase1, config(5000, derive_seed(5, r), burn));
        double acc = 0;
        for (const double v : s.window_x()) acc += v * v;
        (burn == 10000 ? m10 : m20).push_back(acc / 5000.0);
      }
    }
    const double b2 = std::pow(norm_p(kPower, kCase1, 2.0), 2);
    const double target = kCase1.a * kCase1.a / (1 - b2);
    const double se = std::hypot(sd(m10), sd(m20)) / std::sqrt(40.0);
    CHECK(std::abs(mean(m10) - mean(m20)) < 4 * se);
    CHECK(std::abs(mean(m10) - target) < 4 * sd(m10) / std::sqrt(40.0));
  }
}

TEST_CASE("simulation errors") {
  CHECK_THROWS_AS((void)simulate(kPower, {0.1, 0.8, 1.0}, config(10, 1)), ValidationError);
  CHECK_THROWS_AS((void)simulate(kPower, {0.47, 0.1, 1.0}, config(10, 1)), ValidationError);
  CHECK_THROWS_AS((void)simulate(kPower, kCase1, config(0, 1)), DomainError);
  SimConfig bad = config(10, 1);
  bad.J = 0;
  CHECK_THROWS_AS((void)simulate(kPower, kCase1, bad), DomainError);
}
