#include "larch/coeff_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "larch/errors.hpp"

namespace larch {

namespace {

constexpr long kEulerMaclaurinStart = 32;
constexpr long kFarimaDirectTerms = 200000;

// B_{2k}/(2k)! for k = 1..8.
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
};

// Euler-Maclaurin tail sum_{j >= N} j^{-s} for N large enough that the Bernoulli
// series is far inside its asymptotic regime.
double euler_maclaurin_tail(double s, double N) {
  const double n_pow = std::pow(N, -s);
  double total = N * n_pow / (s - 1.0) + 0.5 * n_pow;
  double rising = s;  // s (s+1) ... (s + 2k - 2)
  double power = n_pow / N;
  for (std::size_t k = 0; k < kBernoulliOverFactorial.size(); ++k) {
    total += kBernoulliOverFactorial[k] * rising * power;
    rising *= (s + 2.0 * k + 1.0) * (s + 2.0 * k + 2.0);
    power /= N * N;
  }
  return total;
}

void require_lag(long j) {
  if (j < 1) throw DomainError("coefficient index must be >= 1, got " + std::to_string(j));
}

void require_exponent(double d) {
  if (!std::isfinite(d) || d < 0.0) throw DomainError("exponent d must be finite and >= 0");
  if (d >= 0.5) throw DivergenceError("sum of squared coefficients diverges for d >= 1/2");
}

// pi_j(d) = d * P_j(d) with P_1 = 1, P_j = P_{j-1} (j - 1 + d) / j.
double farima_weight(double d, long j) {
  double p = 1.0;
  for (long k = 2; k <= j; ++k) p *= (static_cast<double>(k) - 1.0 + d) / static_cast<double>(k);
  return d * p;
}

double farima_weight_deriv(double d, long j) {
  double p = 1.0;
  double harmonic = 0.0;
  for (long k = 2; k <= j; ++k) {
    const double km1d = static_cast<double>(k) - 1.0 + d;
    p *= km1d / static_cast<double>(k);
    harmonic += 1.0 / km1d;
  }
  return p * (1.0 + d * harmonic);
}

// sum_{j >= 1} |pi_j(d)|^p by direct summation plus the asymptotic tail
// pi_j ~ j^{d-1} / Gamma(d).
double farima_power_sum(double d, double p) {
  if (d == 0.0) return 0.0;
  if (p * (1.0 - d) <= 1.0) throw DivergenceError("FARIMA coefficient norm diverges");
  double sum = 0.0;
  double pi = d;
  for (long j = 1; j <= kFarimaDirectTerms; ++j) {
    if (j > 1) pi *= (static_cast<double>(j) - 1.0 + d) / static_cast<double>(j);
    sum += std::pow(std::abs(pi), p);
  }
  const double lead = std::pow(1.0 / std::tgamma(d), p);
  return sum + lead * zeta_tail(p * (1.0 - d), kFarimaDirectTerms + 1);
}

}  // namespace

bool Theta::finite() const noexcept {
  return std::isfinite(d) && std::isfinite(c) && std::isfinite(a);
}

void ParamSpace::validate() const {
  if (!(d_u > 0.0 && d_u < 0.5)) throw DomainError("parameter space needs 0 < d_u < 1/2");
  if (!(C > 0.0 && C < 1.0)) throw DomainError("parameter space needs 0 < C < 1");
  if (!(a_d > 0.0 && a_d < a_u && std::isfinite(a_u)))
    throw DomainError("parameter space needs 0 < a_d < a_u < inf");
}

double ParamSpace::c_upper(double d, CoeffFamily family) const {
  return family == CoeffFamily::PowerLaw ? larch::c_upper(d, C) : farima_c_upper(d, C);
}

bool ParamSpace::contains(const Theta& theta, CoeffFamily family) const {
  if (!theta.finite()) return false;
  if (theta.d < 0.0 || theta.d > d_u) return false;
  if (theta.a < a_d || theta.a > a_u) return false;
  const double cu = c_upper(theta.d, family);
  return theta.c >= 0.0 && theta.c <= cu * (1.0 + 1e-14);
}

void ParamSpace::check(const Theta& theta, CoeffFamily family) const {
  validate();
  if (!theta.finite()) throw ValidationError("theta has non-finite components");
  if (theta.d < 0.0 || theta.d > d_u)
    throw ValidationError("d = " + std::to_string(theta.d) + " outside [0, d_u]");
  if (theta.a < a_d || theta.a > a_u)
    throw ValidationError("a = " + std::to_string(theta.a) + " outside [a_d, a_u]");
  if (!contains(theta, family))
    throw ValidationError("c = " + std::to_string(theta.c) + " outside [0, c_u(d)]");
}

double coeff(const CoeffSpec& spec, const Theta& theta, long j) {
  require_lag(j);
  if (spec.family == CoeffFamily::PowerLaw)
    return theta.c * std::pow(static_cast<double>(j), theta.d - 1.0);
  return theta.c * farima_weight(theta.d, j);
}

double coeff_deriv(const CoeffSpec& spec, const Theta& theta, long j, int order_d, int order_c) {
  require_lag(j);
  if (order_d < 0 || order_d > 3 || order_c < 0 || order_c > 1 || order_d + order_c < 1)
    throw DomainError("coeff_deriv needs order_d in 0..3, order_c in 0..1, total >= 1");
  const double scale = order_c == 1 ? 1.0 : theta.c;
  if (spec.family == CoeffFamily::PowerLaw) {
    const double lj = std::log(static_cast<double>(j));
    return scale * std::pow(lj, order_d) * std::pow(static_cast<double>(j), theta.d - 1.0);
  }
  if (order_d > 1) throw UnsupportedError("FARIMA d-derivatives are available to order 1 only");
  return scale * (order_d == 0 ? farima_weight(theta.d, j) : farima_weight_deriv(theta.d, j));
}

double zeta_tail(double s, long t0) {
  if (!(s > 1.0)) throw DivergenceError("zeta_tail needs s > 1");
  if (t0 < 1) throw DomainError("zeta_tail needs t0 >= 1");
  double partial = 0.0;
  long start = t0;
  // Summed from the small end; terms below kEulerMaclaurinStart are added last-to-first
  // so the smaller ones accumulate before the leading term.
  if (t0 < kEulerMaclaurinStart) {
    start = kEulerMaclaurinStart;
    for (long j = kEulerMaclaurinStart - 1; j >= t0; --j) partial += std::pow(static_cast<double>(j), -s);
  }
  return euler_maclaurin_tail(s, static_cast<double>(start)) + partial;
}

double c_upper(double d, double C) {
  require_exponent(d);
  if (!(C > 0.0 && C < 1.0)) throw DomainError("c_upper needs 0 < C < 1");
  return C / std::sqrt(zeta_tail(2.0 - 2.0 * d, 1));
}

double farima_square_sum(double d) {
  require_exponent(d);
  if (d == 0.0) return 0.0;
  const double g = std::tgamma(1.0 - d);
  return std::tgamma(1.0 - 2.0 * d) / (g * g) - 1.0;
}

double farima_c_upper(double d, double C) {
  require_exponent(d);
  if (!(C > 0.0 && C < 1.0)) throw DomainError("farima_c_upper needs 0 < C < 1");
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return C / std::sqrt(farima_square_sum(d));
}

double norm_p(const CoeffSpec& spec, const Theta& theta, double p) {
  if (!(p >= 2.0)) throw DomainError("norm_p needs p >= 2");
  if (!theta.finite() || theta.d < 0.0) throw DomainError("norm_p needs finite theta with d >= 0");
  if (p * (1.0 - theta.d) <= 1.0) throw DivergenceError("coefficient p-norm diverges");
  if (theta.c == 0.0) return 0.0;
  const double ac = std::abs(theta.c);
  if (spec.family == CoeffFamily::PowerLaw)
    return ac * std::pow(zeta_tail(p * (1.0 - theta.d), 1), 1.0 / p);
  if (p == 2.0) return ac * std::sqrt(farima_square_sum(theta.d));
  return ac * std::pow(farima_power_sum(theta.d, p), 1.0 / p);
}

double tail_variance(const CoeffSpec& spec, const Theta& theta, long t) {
  if (t < 1) throw DomainError("tail_variance needs t >= 1");
  require_exponent(theta.d);
  const double c2 = theta.c * theta.c;
  if (c2 == 0.0) return 0.0;
  if (spec.family == CoeffFamily::PowerLaw) return c2 * zeta_tail(2.0 - 2.0 * theta.d, t);
  if (theta.d == 0.0) return 0.0;
  if (t > kFarimaDirectTerms) {
    const double g = std::tgamma(theta.d);
    return c2 * zeta_tail(2.0 - 2.0 * theta.d, t) / (g * g);
  }
  double head = 0.0;
  double pi = theta.d;
  for (long j = 1; j < t; ++j) {
    if (j > 1) pi *= (static_cast<double>(j) - 1.0 + theta.d) / static_cast<double>(j);
    head += pi * pi;
  }
  return c2 * std::max(0.0, farima_square_sum(theta.d) - head);
}

CoeffTable coeff_table(const CoeffSpec& spec, double d, std::size_t length, int deriv_order) {
  if (deriv_order < 0 || deriv_order > 2) throw DomainError("coeff_table deriv_order must be 0..2");
  CoeffTable table;
  table.u.resize(length);
  if (deriv_order >= 1) table.du.resize(length);
  if (deriv_order >= 2) table.d2u.resize(length);

  if (spec.family == CoeffFamily::PowerLaw) {
    for (std::size_t i = 0; i < length; ++i) {
      const double lj = std::log(static_cast<double>(i + 1));
      const double u = std::exp((d - 1.0) * lj);
      table.u[i] = u;
      if (deriv_order >= 1) table.du[i] = lj * u;
      if (deriv_order >= 2) table.d2u[i] = lj * lj * u;
    }
    return table;
  }

  if (deriv_order >= 2) throw UnsupportedError("FARIMA d-derivatives are available to order 1 only");
  double p = 1.0;
  double harmonic = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    const double k = static_cast<double>(i + 1);
    if (i > 0) {
      const double km1d = k - 1.0 + d;
      p *= km1d / k;
      harmonic += 1.0 / km1d;
    }
    table.u[i] = d * p;
    if (deriv_order >= 1) table.du[i] = p * (1.0 + d * harmonic);
  }
  return table;
}

void NoiseMoments::validate() const {
  constexpr double tol = 1e-12;
  if (auto it = mu.find(1); it != mu.end() && std::abs(it->second) > tol)
    throw DomainError("innovations must have mean zero");
  if (auto it = mu.find(2); it != mu.end() && std::abs(it->second - 1.0) > tol)
    throw DomainError("innovations must have unit variance");
  for (const auto& [p, m] : mu) {
    if (auto it = mu_abs.find(p); it != mu_abs.end() && it->second < std::abs(m) - tol)
      throw DomainError("absolute moment of order " + std::to_string(p) + " below |mu_p|");
  }
  double previous = 0.0;
  for (const auto& [p, m] : mu_abs) {
    if (p < 1) continue;
    const double root = std::pow(m, 1.0 / p);
    if (root < previous * (1.0 - 1e-12))
      throw DomainError("absolute moments violate Lyapunov monotonicity at p = " + std::to_string(p));
    previous = root;
  }
}

double NoiseMoments::signed_moment(int p) const {
  const auto it = mu.find(p);
  if (it == mu.end()) throw IncompleteInputError("missing moment mu_" + std::to_string(p));
  return it->second;
}

double NoiseMoments::abs_moment(int p) const {
  const auto it = mu_abs.find(p);
  if (it == mu_abs.end()) throw IncompleteInputError("missing absolute moment |mu|_" + std::to_string(p));
  return it->second;
}

NoiseMoments gaussian_moments(int p_max) {
  if (p_max < 2) throw DomainError("gaussian_moments needs p_max >= 2");
  NoiseMoments nm;
  double double_factorial = 1.0;  // (p-1)!! for even p
  for (int p = 1; p <= p_max; ++p) {
    if (p % 2 == 0) {
      double_factorial *= static_cast<double>(p - 1);
      nm.mu[p] = double_factorial;
    } else {
      nm.mu[p] = 0.0;
    }
    nm.mu_abs[p] = std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1)) / std::sqrt(std::numbers::pi);
  }
  return nm;
}

double m3_zeta() { return (3.0 + std::sqrt(21.0)) / 6.0; }

MomentReport check_moment_conditions(const CoeffSpec& spec, const Theta& theta,
                                     const NoiseMoments& nm, std::span<const int> orders) {
  nm.validate();
  MomentReport report;
  const double b2 = norm_p(spec, theta, 2.0);

  const double m3_lhs = std::cbrt(nm.abs_moment(3)) * norm_p(spec, theta, 3.0) + 3.0 * m3_zeta() * b2;
  report.m3 = {m3_lhs, m3_lhs < 1.0};

  for (const int p : orders) {
    if (p < 2) throw DomainError("moment condition order must be >= 2");
    const double prime = std::sqrt(std::pow(2.0, p) - p - 1.0) *
                         std::pow(nm.abs_moment(p), 1.0 / p) * b2;
    report.mp_prime[p] = {prime, prime < 1.0};

    if (p >= 4 && p % 2 == 0) {
      double sum = 0.0;
      double binom = 1.0;  // C(p, j), updated incrementally
      for (int j = 1; j <= p; ++j) {
        binom *= static_cast<double>(p - j + 1) / static_cast<double>(j);
        if (j < 2) continue;
        const double bj = norm_p(spec, theta, static_cast<double>(j));
        sum += binom * std::pow(bj, j) * std::abs(nm.signed_moment(j));
      }
      report.mp_dblprime[p] = {sum, sum < 1.0};
    }
  }
  return report;
}

}  // namespace larch
