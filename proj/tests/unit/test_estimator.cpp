#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "larch/errors.hpp"
#include "larch/estimator.hpp"
#include "larch/simulator.hpp"

using namespace larch;

namespace {

const CoeffSpec kPower{};
const ParamSpace kSpace{};

Sample path(std::size_t n, std::uint64_t seed, const Theta& theta) {
  SimConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  return simulate(kPower, theta, cfg);
}

}  // namespace

TEST_CASE("box projection") {
  const Theta t = clamp_to_space({0.7, 5.0, 20.0}, kSpace, CoeffFamily::PowerLaw);
  CHECK(t.d == kSpace.d_u);
  CHECK(t.c == doctest::Approx(kSpace.c_upper(kSpace.d_u)));
  CHECK(t.a == kSpace.a_u);
  const Theta u = clamp_to_space({-0.1, -1.0, 0.0}, kSpace, CoeffFamily::PowerLaw);
  CHECK(u.d == 0.0);
  CHECK(u.c == 0.0);
  CHECK(u.a == kSpace.a_d);
  CHECK(near_boundary(u, kSpace, CoeffFamily::PowerLaw, 1e-4));
  CHECK_FALSE(near_boundary({0.2, 0.2, 1.0}, kSpace, CoeffFamily::PowerLaw, 1e-4));
  // a fixed coordinate on a face does not count
  CHECK_FALSE(near_boundary({0.2, 0.0, 1.0}, kSpace, CoeffFamily::PowerLaw, 1e-4, {std::nullopt, 0.0, std::nullopt}));
}

TEST_CASE("smooth objectives") {
  OptimOptions opts;
  SUBCASE("interior quadratic") {
    const Objective f = [](const Theta& t) {
      return std::pow(t.d - 0.17, 2) + 3 * std::pow(t.c - 0.25, 2) + 0.5 * std::pow(t.a - 1.3, 2);
    };
    const EstimationResult r = minimize_box(f, kSpace, opts);
    CHECK(r.theta_hat.d == doctest::Approx(0.17).epsilon(1e-3));
    CHECK(r.theta_hat.c == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(r.theta_hat.a == doctest::Approx(1.3).epsilon(1e-3));
    CHECK(r.converged);
    CHECK_FALSE(r.at_boundary);
  }
  SUBCASE("minimum outside the box lands on the face") {
    const Objective f = [](const Theta& t) { return std::pow(t.d - 0.6, 2) + std::pow(t.c - 0.1, 2) + std::pow(t.a - 1, 2); };
    const EstimationResult r = minimize_box(f, kSpace, opts);
    CHECK(r.theta_hat.d == doctest::Approx(kSpace.d_u).epsilon(1e-6));
    CHECK(r.at_boundary);
    CHECK(kSpace.contains(r.theta_hat));
  }
  SUBCASE("global minimum among several") {
    opts.fixed = {std::nullopt, 0.2, 1.0};
    // wells at d = 0.05 (shallow) and d = 0.35 (deep)
    const Objective f = [](const Theta& t) {
      return -0.5 * std::exp(-std::pow((t.d - 0.05) / 0.03, 2)) - std::exp(-std::pow((t.d - 0.35) / 0.03, 2));
    };
    const EstimationResult r = minimize_box(f, kSpace, opts);
    CHECK(r.theta_hat.d == doctest::Approx(0.35).epsilon(1e-3));
    CHECK(r.theta_hat.c == 0.2);
    CHECK(r.theta_hat.a == 1.0);
  }
  SUBCASE("option validation") {
    opts.starts = 0;
    CHECK_THROWS_AS((void)minimize_box([](const Theta&) { return 0.0; }, kSpace, opts), DomainError);
  }
}

TEST_CASE("scale-only fit has a closed form") {
  const Sample s = path(3000, 21, {0.1, 0.2, 1.0});
  const std::span<const double> x = s.window_x();
  double m2 = 0;
  for (const double v : x) m2 += v * v;
  m2 /= static_cast<double>(x.size());
  LossSpec ls;
  ls.variant = LossVariant::Bar;
  OptimOptions opts;
  opts.fixed = {std::nullopt, 0.0, std::nullopt};
  const EstimationResult r = estimate(ls, kPower, x, kSpace, opts);
  CHECK(r.theta_hat.c == 0.0);
  CHECK(std::abs(r.theta_hat.a - std::sqrt(m2)) < 1e-4);
}

TEST_CASE("likelihood estimates") {
  const Sample s = path(4000, 22, {0.1, 0.2, 1.0});
  LossSpec ls;
  ls.variant = LossVariant::Bar;
  OptimOptions opts;
  const EstimationResult r = estimate(ls, kPower, SeriesView::of(s), kSpace, opts);
  CHECK(kSpace.contains(r.theta_hat));
  CHECK(r.variant == LossVariant::Bar);
  // the optimum beats the truth and scattered admissible points
  CHECK(r.loss_at_opt <= loss(ls, kPower, {0.1, 0.2, 1.0}, s, Derivs::Value).value + 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    const double d = 0.45 * u(rng);
    const Theta th{d, u(rng) * kSpace.c_upper(d), 0.5 + u(rng)};
    CHECK(r.loss_at_opt <= loss(ls, kPower, th, s, Derivs::Value).value + 1e-12);
  }
  CHECK(std::abs(r.theta_hat.a - 1.0) < 0.1);

  SUBCASE("reproducible and thread-independent") {
    OptimOptions threaded = opts;
    threaded.threads = 4;
    const EstimationResult again = estimate(ls, kPower, SeriesView::of(s), kSpace, opts);
    const EstimationResult par = estimate(ls, kPower, SeriesView::of(s), kSpace, threaded);
    CHECK(again.theta_hat.d == r.theta_hat.d);
    CHECK(again.theta_hat.c == r.theta_hat.c);
    CHECK(par.theta_hat.d == r.theta_hat.d);
    CHECK(par.theta_hat.a == r.theta_hat.a);
    CHECK(par.loss_at_opt == r.loss_at_opt);
  }
  SUBCASE("exact evaluation agrees with the interpolated path") {
    OptimOptions exact = opts;
    exact.exact_eval = true;
    const EstimationResult e = estimate(ls, kPower, SeriesView::of(s), kSpace, exact);
    CHECK(e.loss_at_opt == doctest::Approx(r.loss_at_opt).epsilon(1e-9));
    CHECK(std::abs(e.theta_hat.d - r.theta_hat.d) < 1e-3);
  }
}

TEST_CASE("d-only estimate is near the truth for a long path") {
  const Sample s = path(10000, 23, {0.2, 0.2, 1.0});
  LossSpec ls;
  ls.variant = LossVariant::Bar;
  OptimOptions opts;
  opts.fixed = {std::nullopt, 0.2, 1.0};
  const EstimationResult r = estimate(ls, kPower, SeriesView::of(s), kSpace, opts);
  CHECK(std::abs(r.theta_hat.d - 0.2) < 0.08);
}

TEST_CASE("windows that are too short") {
  const std::vector<double> x{0.1, -0.3, 0.5, 0.2, -1.0};
  LossSpec ls;
  ls.variant = LossVariant::Bar;
  CHECK_THROWS_AS((void)estimate(ls, kPower, x, kSpace, OptimOptions{}), DegenerateWindowError);
  std::vector<double> longer(50, 0.5);
  ls.variant = LossVariant::Trunc;
  ls.beta = 0.5;  // floor(sqrt(50)) = 7 summands
  CHECK_THROWS_AS((void)estimate(ls, kPower, longer, kSpace, OptimOptions{}), DegenerateWindowError);
}
