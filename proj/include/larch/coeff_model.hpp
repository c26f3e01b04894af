#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace larch {

/// Parameter triple, always ordered (d, c, a).
struct Theta {
  double d = 0.0;  ///< long-memory exponent
  double c = 0.0;  ///< coefficient scale
  double a = 1.0;  ///< intercept

  [[nodiscard]] bool finite() const noexcept;
  [[nodiscard]] Eigen::Vector3d vec() const { return {d, c, a}; }
  [[nodiscard]] static Theta from_vec(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

  friend bool operator==(const Theta&, const Theta&) = default;
};

enum class CoeffFamily {
  PowerLaw,   ///< b_j = c j^{d-1}
  Farima0d0,  ///< b_j = c pi_j(d), pi_j the coefficients of (1-B)^{-d} - 1
};

struct CoeffSpec {
  CoeffFamily family = CoeffFamily::PowerLaw;
};

/// Admissible box for (d, c, a). The c range depends on d through c_upper.
struct ParamSpace {
  double d_u = 0.45;
  double C = 0.9;
  double a_d = 0.1;
  double a_u = 10.0;

  /// Throws DomainError unless 0 < d_u < 1/2, 0 < C < 1, 0 < a_d < a_u < inf.
  void validate() const;

  /// Largest admissible c at exponent d for the given family.
  [[nodiscard]] double c_upper(double d, CoeffFamily family = CoeffFamily::PowerLaw) const;

  [[nodiscard]] bool contains(const Theta& theta, CoeffFamily family = CoeffFamily::PowerLaw) const;

  /// Throws ValidationError naming the violated bound.
  void check(const Theta& theta, CoeffFamily family = CoeffFamily::PowerLaw) const;
};

/// b_j(theta), j >= 1.
[[nodiscard]] double coeff(const CoeffSpec& spec, const Theta& theta, long j);

/// Partial derivative of b_j: order_d in 0..3 with respect to d, order_c in 0..1 with
/// respect to c. Farima0d0 supports order_d <= 1 only.
[[nodiscard]] double coeff_deriv(const CoeffSpec& spec, const Theta& theta, long j, int order_d,
                                 int order_c);

/// sum_{j >= t0} j^{-s}, relative accuracy around 1e-15.
[[nodiscard]] double zeta_tail(double s, long t0);

/// Power-law scale bound C (sum_j j^{2d-2})^{-1/2}.
[[nodiscard]] double c_upper(double d, double C);

/// FARIMA(0,d,0) scale bound C (sum_j pi_j(d)^2)^{-1/2}; infinite at d = 0.
[[nodiscard]] double farima_c_upper(double d, double C);

/// sum_{j >= 1} pi_j(d)^2 = Gamma(1-2d)/Gamma(1-d)^2 - 1.
[[nodiscard]] double farima_square_sum(double d);

/// ||b||_p = (sum_j |b_j|^p)^{1/p}.
[[nodiscard]] double norm_p(const CoeffSpec& spec, const Theta& theta, double p);

/// sum_{j >= t} b_j^2, the mean-square gap between full-past and finite-past sigma at time t.
[[nodiscard]] double tail_variance(const CoeffSpec& spec, const Theta& theta, long t);

/// Unit-scale coefficients u_j(d) with b_j = c u_j(d), and their d-derivatives,
/// stored at index j-1 for j = 1..size.
struct CoeffTable {
  std::vector<double> u;    ///< u_j
  std::vector<double> du;   ///< d/dd u_j (empty unless requested)
  std::vector<double> d2u;  ///< d^2/dd^2 u_j (empty unless requested)
};

/// Builds u_j(d) for j = 1..length. deriv_order 0, 1 or 2.
[[nodiscard]] CoeffTable coeff_table(const CoeffSpec& spec, double d, std::size_t length,
                                     int deriv_order = 0);

/// Moments of the innovation distribution keyed by order p.
struct NoiseMoments {
  std::map<int, double> mu;      ///< E eps^p
  std::map<int, double> mu_abs;  ///< E |eps|^p

  /// Checks mu_1 = 0, mu_2 = 1, |mu|_p >= |mu_p| and monotone |mu|_p^{1/p}.
  void validate() const;
  [[nodiscard]] double signed_moment(int p) const;
  [[nodiscard]] double abs_moment(int p) const;
};

[[nodiscard]] NoiseMoments gaussian_moments(int p_max);

struct ConditionValue {
  double lhs = 0.0;
  bool holds = false;
};

struct MomentReport {
  ConditionValue m3;
  std::map<int, ConditionValue> mp_prime;
  std::map<int, ConditionValue> mp_dblprime;  ///< even p >= 4 only
};

/// Positive root of 3 z^2 - 3 z - 1 = 0.
[[nodiscard]] double m3_zeta();

/// Evaluates the sufficient moment conditions for every order in `orders`.
[[nodiscard]] MomentReport check_moment_conditions(const CoeffSpec& spec, const Theta& theta,
                                                   const NoiseMoments& nm,
                                                   std::span<const int> orders);

}  // namespace larch
