#pragma once
// Independent reference computations used only by the tests.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// sum_{j >= t0} j^{-s} by direct summation to `terms` plus the integral bracket midpoint.
inline double zeta_brute(double s, long t0, long terms = 10'000'000) {
  long double sum = 0.0L;
  const long last = t0 + terms - 1;
  for (long j = last; j >= t0; --j) sum += std::pow(static_cast<long double>(j), -static_cast<long double>(s));
  // remainder sum_{j > last} j^{-s} lies between the integrals from last+1 and last
  const long double lo = std::pow(static_cast<long double>(last + 1), 1.0L - s) / (s - 1.0L);
  const long double hi = std::pow(static_cast<long double>(last), 1.0L - s) / (s - 1.0L);
  return static_cast<double>(sum + 0.5L * (lo + hi));
}

/// Central difference with Richardson extrapolation of step h and h/2.
inline double richardson(const std::function<double(double)>& f, double x, double h) {
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

/// Standard normal quantile by bisection on the complementary error function.
inline double normal_quantile_bisect(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Sum over every lag chain t > s_1 > ... > s_k >= 1 of the Volterra expansion of sigma_t
/// from empty past, enumerated recursively (exponential cost; small t only).
/// b(j) is the coefficient at lag j, eps is 1-based through eps[s-1].
inline double volterra_chains(const std::function<double(long)>& b, const std::vector<double>& eps, double a,
                              long t) {
  std::function<double(long)> walk = [&](long from) -> double {
    double total = 0.0;
    for (long s = from - 1; s >= 1; --s) {
      const double w = b(from - s) * eps[static_cast<std::size_t>(s - 1)];
      total += w * (1.0 + walk(s));
    }
    return total;
  };
  return a * (1.0 + walk(t));
}

}  // namespace oracle
