#include "larch/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "detail/dot.hpp"
#include "larch/errors.hpp"
#include "larch/simulator.hpp"

namespace larch {

namespace {

constexpr double kBlockRatioLimit = 10.0;
constexpr double kTermShareLimit = 0.05;

void require_positive_definite(const Eigen::Matrix3d& m, const char* name) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(m);
  const Eigen::Vector3d ev = eig.eigenvalues();
  const Eigen::LLT<Eigen::Matrix3d> llt(m);
  if (llt.info() != Eigen::Success || !(ev.minCoeff() > 1e-12 * std::abs(ev.maxCoeff()))) {
    std::ostringstream msg;
    msg << name << " is not numerically positive definite; eigenvalues " << ev[0] << ", " << ev[1] << ", "
        << ev[2];
    throw SingularityError(msg.str());
  }
}

Eigen::Matrix3d block_standard_errors(const std::vector<Eigen::Matrix3d>& block_means) {
  const double B = static_cast<double>(block_means.size());
  Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
  for (const auto& m : block_means) mean += m;
  mean /= B;
  Eigen::Matrix3d var = Eigen::Matrix3d::Zero();
  for (const auto& m : block_means) var += (m - mean).cwiseAbs2();
  var /= (B - 1.0);
  return (var / B).cwiseSqrt();
}

std::size_t usable_blocks(std::size_t requested, std::size_t n) {
  return std::clamp<std::size_t>(requested, 2, std::max<std::size_t>(2, n / 2));
}

}  // namespace

SigmaGradientPath sigma_gradient_path(const CoeffSpec& spec, const Theta& theta0,
                                      const PathAverageSettings& mc) {
  if (mc.path_length < 2) throw DomainError("path averages need path_length >= 2");
  if (mc.burn_in < mc.J) throw HistoryError("path averages need burn_in >= J for full-history sigma");
  SimConfig cfg;
  cfg.n = mc.path_length;
  cfg.burn_in = mc.burn_in;
  cfg.J = mc.J;
  cfg.seed = mc.seed;
  const Sample sample = simulate(spec, theta0, cfg);

  const std::size_t J = mc.J;
  CoeffTable table = coeff_table(spec, theta0.d, J, 1);
  std::reverse(table.u.begin(), table.u.end());
  std::reverse(table.du.begin(), table.du.end());

  SigmaGradientPath path;
  path.sigma.resize(mc.path_length);
  path.grad.resize(mc.path_length);
  for (std::size_t i = 0; i < mc.path_length; ++i) {
    const std::size_t p = sample.first + i;
    const double* xs = sample.x.data() + (p - J);
    const double s0 = detail::dot(table.u.data(), xs, J);
    const double s1 = detail::dot(table.du.data(), xs, J);
    path.sigma[i] = sample.sigma[p];
    path.grad[i] = Eigen::Vector3d(theta0.c * s1, s0, 1.0);
  }
  return path;
}

SandwichResult sandwich_from_path(const SigmaGradientPath& path, double epsilon, double mu4, std::size_t blocks,
                                  const FreeMask& free) {
  if (!(epsilon > 0.0)) throw DomainError("sandwich needs epsilon > 0");
  const std::size_t n = path.sigma.size();
  if (n < 4 || path.grad.size() != n) throw DomainError("sandwich needs a path of at least 4 points");
  const std::size_t B = usable_blocks(blocks, n);
  const std::size_t block_len = n / B;

  SandwichResult r;
  std::vector<Eigen::Matrix3d> g_blocks(B, Eigen::Matrix3d::Zero()), h_blocks(B, Eigen::Matrix3d::Zero());
  Eigen::Matrix3d g_sum = Eigen::Matrix3d::Zero(), h_sum = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double s2 = path.sigma[i] * path.sigma[i];
    const double v = s2 + epsilon;
    const Eigen::Matrix3d outer = path.grad[i] * path.grad[i].transpose();
    const double hw = 4.0 * s2 / (v * v);
    const Eigen::Matrix3d g_t = (mu4 - 1.0) * hw * (s2 * s2 / (v * v)) * outer;
    const Eigen::Matrix3d h_t = hw * outer;
    g_sum += g_t;
    h_sum += h_t;
    const std::size_t b = std::min(i / block_len, B - 1);
    g_blocks[b] += g_t;
    h_blocks[b] += h_t;
  }
  for (std::size_t b = 0; b < B; ++b) {
    const double len = static_cast<double>(b + 1 == B ? n - b * block_len : block_len);
    g_blocks[b] /= len;
    h_blocks[b] /= len;
  }
  r.G = g_sum / static_cast<double>(n);
  r.H = h_sum / static_cast<double>(n);
  r.G_se = block_standard_errors(g_blocks);
  r.H_se = block_standard_errors(h_blocks);
  r.mc_samples = n;

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(r.H);
  r.h_condition = eig.eigenvalues().maxCoeff() / std::max(eig.eigenvalues().minCoeff(), 1e-300);
  require_positive_definite(r.H, "H");
  require_positive_definite(r.G, "G");

  std::vector<int> idx;
  for (int i = 0; i < 3; ++i)
    if (free[static_cast<std::size_t>(i)]) idx.push_back(i);
  if (idx.empty()) throw DomainError("sandwich needs at least one free parameter");
  const Eigen::MatrixXd h = r.H(idx, idx);
  const Eigen::MatrixXd g = r.G(idx, idx);
  const Eigen::LLT<Eigen::MatrixXd> llt(h);
  const Eigen::MatrixXd hinv_g = llt.solve(g);
  const Eigen::MatrixXd cov = llt.solve(hinv_g.transpose());
  r.cov.setZero();
  r.cov(idx, idx) = 0.5 * (cov + cov.transpose());
  r.sd = r.cov.diagonal().cwiseSqrt();
  return r;
}

SandwichResult sandwich(const CoeffSpec& spec, const Theta& theta0, double epsilon, const NoiseMoments& nm,
                        const PathAverageSettings& mc, const FreeMask& free) {
  const double mu4 = nm.signed_moment(4);
  if (!(epsilon > 0.0)) throw DomainError("sandwich needs epsilon > 0");
  return sandwich_from_path(sigma_gradient_path(spec, theta0, mc), epsilon, mu4, mc.blocks, free);
}

LimitH0Result limit_h0_from_path(const SigmaGradientPath& path, double mu4, std::size_t blocks) {
  const std::size_t n = path.sigma.size();
  if (n < 4 || path.grad.size() != n) throw DomainError("limit_h0 needs a path of at least 4 points");
  const std::size_t B = usable_blocks(blocks, n);
  const std::size_t block_len = n / B;

  LimitH0Result r;
  std::vector<double> block_mean(B, 0.0);
  detail::CompensatedSum total;
  double max_term = 0.0;
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double inv = 4.0 / (path.sigma[i] * path.sigma[i]);
    if (!std::isfinite(inv)) {
      r.diverged = true;
      r.max_term_share = 1.0;
      return r;
    }
    sum += inv * path.grad[i] * path.grad[i].transpose();
    total.add(inv);
    max_term = std::max(max_term, inv);
    block_mean[std::min(i / block_len, B - 1)] += inv;
  }
  for (std::size_t b = 0; b < B; ++b)
    block_mean[b] /= static_cast<double>(b + 1 == B ? n - b * block_len : block_len);
  std::vector<double> sorted = block_mean;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(B / 2), sorted.end());
  const double median = sorted[B / 2];

  r.H0 = sum / static_cast<double>(n);
  r.max_block_ratio = *std::max_element(block_mean.begin(), block_mean.end()) / median;
  r.max_term_share = max_term / total.value();
  r.diverged = r.max_block_ratio > kBlockRatioLimit || r.max_term_share > kTermShareLimit;
  if (!r.diverged) {
    const Eigen::LLT<Eigen::Matrix3d> llt(r.H0);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(r.H0);
    if (llt.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 1e-12 * eig.eigenvalues().maxCoeff())
      r.limit_cov = (mu4 - 1.0) * llt.solve(Eigen::Matrix3d::Identity());
  }
  return r;
}

LimitH0Result limit_h0(const CoeffSpec& spec, const Theta& theta0, const NoiseMoments& nm,
                       const PathAverageSettings& mc) {
  return limit_h0_from_path(sigma_gradient_path(spec, theta0, mc), nm.signed_moment(4), mc.blocks);
}

RatePrediction predicted_rate(std::size_t n, double beta, double d) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("predicted_rate needs 0 < beta <= 1");
  if (!(d >= 0.0 && d < 0.5)) throw DomainError("predicted_rate needs 0 <= d < 1/2");
  if (n < 1) throw DomainError("predicted_rate needs n >= 1");
  RatePrediction r;
  r.score_gap_order = beta / 2.0 + d - 0.5;
  const double border = 1.0 - 2.0 * d;
  r.clt_regime = beta < border - 1e-12;
  r.rate_exponent = r.clt_regime ? -beta / 2.0 : -(0.5 - d);
  const double nn = static_cast<double>(n);
  r.score_gap_scale = std::pow(nn, r.score_gap_order);
  r.rate_scale = std::pow(nn, r.rate_exponent);
  return r;
}

}  // namespace larch
