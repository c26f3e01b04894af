#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "larch/asymptotics.hpp"
#include "larch/errors.hpp"
#include "larch/likelihood.hpp"
#include "larch/simulator.hpp"

using namespace larch;

namespace {

const CoeffSpec kPower{};

PathAverageSettings settings(std::size_t length, std::uint64_t seed = 1) {
  PathAverageSettings mc;
  mc.path_length = length;
  mc.seed = seed;
  return mc;
}

SigmaGradientPath synthetic(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  SigmaGradientPath p;
  for (std::size_t i = 0; i < n; ++i) {
    p.sigma.push_back(0.5 + std::abs(z(rng)));
    p.grad.emplace_back(z(rng), z(rng), 1.0);
  }
  return p;
}

}  // namespace

TEST_CASE("sandwich averages on a synthetic path") {
  const SigmaGradientPath p = synthetic(2000, 4);
  const double eps = 0.05, mu4 = 3.0;
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero(), H = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < p.sigma.size(); ++i) {
    const double s = p.sigma[i], v = s * s + eps;
    const Eigen::Matrix3d o = p.grad[i] * p.grad[i].transpose();
    H += 4 * s * s / (v * v) * o;
    G += (mu4 - 1) * 4 * std::pow(s, 6) / std::pow(v, 4) * o;
  }
  G /= 2000.0;
  H /= 2000.0;
  const SandwichResult r = sandwich_from_path(p, eps, mu4, 20);
  CHECK((r.G - G).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.H - H).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::Matrix3d cov = H.inverse() * G * H.inverse();
  CHECK((r.cov - cov).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.sd[1] == doctest::Approx(std::sqrt(cov(1, 1))));
  CHECK(r.mc_samples == 2000);
  CHECK(r.G_se.maxCoeff() > 0.0);

  SUBCASE("sub-block sandwich") {
    const SandwichResult d_only = sandwich_from_path(p, eps, mu4, 20, {true, false, false});
    CHECK(d_only.sd[0] == doctest::Approx(std::sqrt(G(0, 0)) / H(0, 0)).epsilon(1e-12));
    CHECK(d_only.sd[1] == 0.0);
    CHECK(d_only.cov(0, 2) == 0.0);
    const SandwichResult da = sandwich_from_path(p, eps, mu4, 20, {true, false, true});
    Eigen::Matrix2d h2, g2;
    h2 << H(0, 0), H(0, 2), H(2, 0), H(2, 2);
    g2 << G(0, 0), G(0, 2), G(2, 0), G(2, 2);
    const Eigen::Matrix2d c2 = h2.inverse() * g2 * h2.inverse();
    CHECK(da.cov(2, 2) == doctest::Approx(c2(1, 1)).epsilon(1e-10));
    CHECK(da.cov(0, 2) == doctest::Approx(c2(0, 1)).epsilon(1e-10));
    CHECK_THROWS_AS((void)sandwich_from_path(p, eps, mu4, 20, {false, false, false}), DomainError);
  }
  CHECK_THROWS_AS((void)sandwich_from_path(p, 0.0, mu4, 20), DomainError);
}

TEST_CASE("sandwich at a simulated design") {
  const SandwichResult r = sandwich(kPower, {0.1, 0.2, 1.0}, 0.01, gaussian_moments(8), settings(100000));
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eg(r.G), eh(r.H);
  CHECK(eg.eigenvalues().minCoeff() > 0.0);
  CHECK(eh.eigenvalues().minCoeff() > 0.0);
  CHECK(r.h_condition >= 1.0);
  CHECK((r.cov - r.cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  SUBCASE("longer paths agree") {
    const SandwichResult d1 = sandwich(kPower, {0.1, 0.2, 1.0}, 0.01, gaussian_moments(8), settings(100000, 2), {true, false, false});
    const SandwichResult d2 = sandwich(kPower, {0.1, 0.2, 1.0}, 0.01, gaussian_moments(8), settings(200000, 2), {true, false, false});
    CHECK(d2.sd[0] == doctest::Approx(d1.sd[0]).epsilon(0.1));
  }
  SUBCASE("zero scale makes H singular") {
    CHECK_THROWS_AS((void)sandwich(kPower, {0.1, 0.0, 1.0}, 0.01, gaussian_moments(8), settings(5000)), SingularityError);
  }
  SUBCASE("history requirement") {
    PathAverageSettings mc = settings(1000);
    mc.burn_in = 100;
    CHECK_THROWS_AS((void)sandwich(kPower, {0.1, 0.2, 1.0}, 0.01, gaussian_moments(8), mc), HistoryError);
  }
}

TEST_CASE("gradient path matches the loss ingredients") {
  PathAverageSettings mc = settings(50, 9);
  const SigmaGradientPath p = sigma_gradient_path(kPower, {0.2, 0.3, 1.1}, mc);
  SimConfig cfg;
  cfg.n = 50;
  cfg.seed = 9;
  const Sample s = simulate(kPower, {0.2, 0.3, 1.1}, cfg);
  for (std::size_t t : {1UL, 25UL, 50UL}) {
    CHECK(p.sigma[t - 1] == doctest::Approx(sigma_full(kPower, {0.2, 0.3, 1.1}, s, t, 2000)).epsilon(1e-12));
    const double h = 1e-6;
    const double fd = (sigma_full(kPower, {0.2 + h, 0.3, 1.1}, s, t, 2000) - sigma_full(kPower, {0.2 - h, 0.3, 1.1}, s, t, 2000)) / (2 * h);
    CHECK(p.grad[t - 1][0] == doctest::Approx(fd).epsilon(1e-6));
    CHECK(p.grad[t - 1][1] == doctest::Approx((p.sigma[t - 1] - 1.1) / 0.3).epsilon(1e-10));
    CHECK(p.grad[t - 1][2] == 1.0);
  }
}

TEST_CASE("epsilon-free limit") {
  SUBCASE("zero scale gives 4/a^2 in the intercept entry") {
    const LimitH0Result r = limit_h0(kPower, {0.1, 0.0, 1.5}, gaussian_moments(8), settings(20000));
    CHECK_FALSE(r.diverged);
    CHECK(r.H0(2, 2) == doctest::Approx(4.0 / (1.5 * 1.5)).epsilon(1e-12));
    CHECK(r.H0(0, 0) == 0.0);
    CHECK_FALSE(r.limit_cov.has_value());
  }
  SUBCASE("a near-zero sigma trips the monitor") {
    SigmaGradientPath p = synthetic(5000, 6);
    p.sigma[1234] = 1e-4;
    const LimitH0Result r = limit_h0_from_path(p, 3.0, 50);
    CHECK(r.diverged);
    CHECK(r.max_term_share > 0.05);
  }
  SUBCASE("well-behaved synthetic path") {
    const LimitH0Result r = limit_h0_from_path(synthetic(5000, 7), 3.0, 50);
    CHECK_FALSE(r.diverged);
    REQUIRE(r.limit_cov.has_value());
    CHECK(((*r.limit_cov) * r.H0 - 2.0 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("predicted rates") {
  const RatePrediction border = predicted_rate(1000, 0.6, 0.2);
  CHECK_FALSE(border.clt_regime);
  CHECK(border.rate_exponent == doctest::Approx(-(0.5 - 0.2)));
  const RatePrediction white = predicted_rate(1000, 1.0, 0.0);
  CHECK(white.score_gap_order == doctest::Approx(0.0));
  CHECK(white.rate_exponent == doctest::Approx(-0.5));
  const RatePrediction case2 = predicted_rate(10000, 0.599, 0.2);
  CHECK(case2.score_gap_order == doctest::Approx(-0.0005));
  CHECK(case2.clt_regime);
  CHECK(case2.rate_exponent == doctest::Approx(-0.2995));
  CHECK(case2.rate_scale == doctest::Approx(std::pow(10000.0, -0.2995)));
  const RatePrediction case1 = predicted_rate(10000, 0.799, 0.1);
  CHECK(case1.clt_regime);
  CHECK(case1.score_gap_order == doctest::Approx(-0.0005));
  CHECK_THROWS_AS((void)predicted_rate(100, 0.0, 0.1), DomainError);
  CHECK_THROWS_AS((void)predicted_rate(100, 0.5, 0.5), DomainError);
}
