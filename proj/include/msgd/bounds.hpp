#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "msgd/dist.hpp"
#include "msgd/kernel.hpp"
#include "msgd/popridge.hpp"

namespace msgd {

enum class OperatorA { Identity, Sigma };

/// All theoretical constants feeding the error bounds: the noise bounds
/// c^{1/2} = R (1 + 2 ||g* - g_lambda||_inf) and tr C = 2 (1 + ||g* -
/// g_lambda||_inf^2) tr Sigma, the spectral sum tr(Sigma (Sigma + lambda
/// I)^-2), and the initial-condition norm ||g0 - g_lambda||_H.
struct BoundParams {
  double R = 1.0;
  double delta = 1.0;
  double lambda = 0.01;
  double gamma = 0.25;
  double alpha = 0.0;
  double sup_inf_norm = 0.0;  // ||g* - g_lambda||_inf on the probe grid
  double c_half = 0.0;
  double trC = 0.0;
  double trSigma = 0.0;
  double eff_dim2 = 0.0;  // tr(Sigma (Sigma + lambda I)^-2)
  double h_norm_init = 0.0;  // ||g0 - g_lambda||_H
  OperatorA operator_a = OperatorA::Identity;
};

/// Fill the noise constants from a solved g_lambda. The spectrum of Sigma
/// is approximated by the eigenvalues of the symmetric weighted Nystrom
/// matrix W^{1/2} G W^{1/2}; the approximation converges under grid
/// refinement.
inline BoundParams noise_constants(const MarginDistribution& d,
                                   const KernelSpec& k,
                                   const HFunction& g_lambda,
                                   const QuadratureGrid& grid,
                                   int probe_per_interval = 2001) {
  BoundParams p;
  p.R = k.bound;
  p.delta = d.delta();

  double sup = 0.0;
  for (double x : support_probe(d, probe_per_interval))
    sup = std::max(sup, std::abs(d.bayes_regression(x) - g_lambda.eval(x)));
  p.sup_inf_norm = sup;
  p.c_half = p.R * (1.0 + 2.0 * sup);

  std::vector<double> diag(grid.nodes.size());
  for (std::size_t j = 0; j < grid.nodes.size(); ++j)
    diag[j] = grid.weights[j] * k.eval(grid.nodes[j], grid.nodes[j]);
  p.trSigma = pairwise_sum(diag);
  p.trC = 2.0 * (1.0 + sup * sup) * p.trSigma;
  return p;
}

/// tr(Sigma (Sigma + lambda I)^-2) from the weighted Nystrom eigenproblem.
inline double effective_dim2(const KernelSpec& k, const QuadratureGrid& grid,
                             double lambda) {
  const auto m = static_cast<Eigen::Index>(grid.nodes.size());
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      A(i, j) = std::sqrt(grid.weights[i] * grid.weights[j]) *
                k.eval(grid.nodes[i], grid.nodes[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < m; ++t) {
    const double s = std::max(es.eigenvalues()(t), 0.0);
    acc += s / ((s + lambda) * (s + lambda));
  }
  return acc;
}

struct ScheduleConstants {
  double alpha_n;  // prod (1 - gamma_i lambda)
  double beta_n;   // sum gamma_k^2 prod_{i>k} (1 - gamma_i lambda)^2
  double zeta_n;   // max_k gamma_k prod_{i>k} (1 - gamma_i lambda)
};

/// Exact schedule constants by direct accumulation.
inline ScheduleConstants schedule_constants_exact(double gamma, double lambda,
                                                  double alpha,
                                                  std::size_t n) {
  if (gamma * lambda >= 1.0)
    throw std::invalid_argument("schedule_constants: gamma*lambda < 1");
  double a = 1.0, b = 0.0, z = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double gk =
        alpha == 0.0 ? gamma : gamma / std::pow(static_cast<double>(k), alpha);
    const double dk = 1.0 - gk * lambda;
    a *= dk;
    b = b * dk * dk + gk * gk;
    z = std::max(z * dk, gk);
  }
  return {a, b, z};
}

/// Closed-form upper estimates for the same constants (alpha in [0,1]).
inline ScheduleConstants schedule_constants_estimate(double gamma,
                                                     double lambda,
                                                     double alpha,
                                                     std::size_t n) {
  const double gl = gamma * lambda;
  const double nn = static_cast<double>(n);
  ScheduleConstants e{};
  if (alpha == 0.0) {
    e.alpha_n = std::pow(1.0 - gl, nn);
    e.beta_n = gamma / lambda;
    e.zeta_n = gamma;
  } else if (alpha == 1.0) {
    if (gl >= 0.5)
      throw std::invalid_argument("alpha=1 estimates need gamma*lambda < 1/2");
    e.alpha_n = std::pow(nn, -gl);
    e.beta_n = 2.0 * (1.0 - gl) / (1.0 - 2.0 * gl) * std::pow(4.0, gl) *
               gamma * gamma * std::pow(nn, -2.0 * gl);
    e.zeta_n = gamma / (1.0 - gl) * std::pow(nn, -gl);
  } else {
    const double am1 = 1.0 - alpha;
    e.alpha_n = std::exp(-gl / am1 * (std::pow(nn + 1.0, am1) - 1.0));
    const double L =
        2.0 * gl / am1 * std::pow(2.0, am1) * (1.0 - std::pow(0.75, am1));
    double S;
    if (alpha > 0.5)
      S = 2.0 * alpha / (2.0 * alpha - 1.0);
    else if (alpha == 0.5)
      S = std::log(3.0 * nn);
    else
      S = std::pow(nn, 1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha);
    e.beta_n = gamma * gamma * S * std::exp(-L * std::pow(nn, am1)) +
               std::pow(2.0, alpha) * gamma / (lambda * std::pow(nn, alpha));
    e.zeta_n = std::max(gamma / (1.0 - gl) * e.alpha_n,
                        gamma / std::pow(nn, alpha));
  }
  return e;
}

/// Martingale tail bound in the phi form
///   2 exp(-(b^2/a^2) phi(a t / b^2)), phi(u) = (1+u) ln(1+u) - u.
/// The displayed statement prints ln(1 + t a / b), but its own proof
/// rewrites the exponent exactly as the phi form used here; the display
/// appears to be a typo and the phi form is the one the Bernstein
/// corollary is derived from.
inline double pinelis_tail(double t, double a, double b) {
  if (t < 0.0 || a <= 0.0 || b <= 0.0)
    throw std::invalid_argument("pinelis_tail: t >= 0, a,b > 0");
  const double u = a * t / (b * b);
  const double phi = (1.0 + u) * std::log1p(u) - u;
  const double v = 2.0 * std::exp(-(b * b) / (a * a) * phi);
  return std::min(v, 2.0);
}

inline double bernstein_tail(double t, double a, double b) {
  if (t < 0.0 || a <= 0.0 || b <= 0.0)
    throw std::invalid_argument("bernstein_tail: t >= 0, a,b > 0");
  const double v = 2.0 * std::exp(-t * t / (2.0 * (b * b + a * t / 3.0)));
  return std::min(v, 2.0);
}

struct TheoremBound {
  double value;       // the exponential tail bound, clamped to (0, 4]
  bool applicable;    // burn-in condition met at this n
};

struct ErrorBounds {
  TheoremBound thm3;      // decreasing step, plain iterate
  TheoremBound thm4;      // tail-averaged, constant step
  TheoremBound thm5_krr;  // kernel ridge regression
  TheoremBound full_avg;  // full average, constant step
};

/// Evaluate every error bound at sample count n.
/// thm3:   2 exp(-delta^2 n^alpha / C_R)
/// thm4:   4 exp(-delta^2 K_R (n+1)),
///         K_R^-1 = 2^9 R^2 (1+s^2) tr(Sigma H^-2) + 32 delta R^2 (1+2s)/(3 lambda)
/// thm5:   4 exp(-C0 lambda^4 delta^2 n / R^8), C0^-1 = 72 (1 + lambda R^2)^2
/// full:   4 exp(-delta^2 K_R (n+1)) with the max-of-two-branches constant.
inline ErrorBounds thm_error_bounds(const BoundParams& p, std::size_t n) {
  const double s = p.sup_inf_norm;
  const double R = p.R, R2 = R * R;
  const double nn = static_cast<double>(n);
  ErrorBounds out{};

  const double C_R =
      p.gamma * (std::pow(2.0, p.alpha + 7.0) * R2 * p.trSigma * (1.0 + s * s) /
                     p.lambda +
                 8.0 * R2 * p.delta * (1.0 + 2.0 * s) / 3.0);
  out.thm3.value = std::min(
      2.0 * std::exp(-p.delta * p.delta * std::pow(nn, p.alpha) / C_R), 2.0);
  {
    // burn-in: alpha_n estimate <= delta / (5 R ||g0 - g_lambda||)
    const double target = p.delta / (5.0 * R * p.h_norm_init);
    double alpha_n_est;
    if (p.alpha == 0.0)
      alpha_n_est = std::pow(1.0 - p.gamma * p.lambda, nn);
    else if (p.alpha == 1.0)
      alpha_n_est = std::pow(nn, -p.gamma * p.lambda);
    else
      alpha_n_est = std::exp(-p.gamma * p.lambda / (1.0 - p.alpha) *
                             (std::pow(nn + 1.0, 1.0 - p.alpha) - 1.0));
    out.thm3.applicable = alpha_n_est <= target;
  }

  const double KR_inv = 512.0 * R2 * (1.0 + s * s) * p.eff_dim2 +
                        32.0 * p.delta * R2 * (1.0 + 2.0 * s) / (3.0 * p.lambda);
  out.thm4.value = std::min(
      4.0 * std::exp(-p.delta * p.delta * (nn + 1.0) / KR_inv), 4.0);
  out.thm4.applicable =
      nn >= 2.0 / (p.gamma * p.lambda) *
                std::log(5.0 * R * p.h_norm_init / p.delta);

  const double C0 = 1.0 / (72.0 * (1.0 + p.lambda * R2) *
                           (1.0 + p.lambda * R2));
  out.thm5_krr.value = std::min(
      4.0 * std::exp(-C0 * std::pow(p.lambda, 4.0) * p.delta * p.delta * nn /
                     std::pow(R, 8.0)),
      4.0);
  out.thm5_krr.applicable = true;

  const double h = p.h_norm_init;
  const double branch1 = 128.0 * R2 * (1.0 + s * s) * p.eff_dim2 +
                         8.0 * R2 * (1.0 + 2.0 * s) / (3.0 * p.lambda);
  const double branch2 = 64.0 * R2 * R2 * h * p.eff_dim2 +
                         16.0 * R2 * R2 * h / (3.0 * p.lambda);
  const double KRfull_inv = std::max(branch1, branch2);
  out.full_avg.value = std::min(
      4.0 * std::exp(-p.delta * p.delta * (nn + 1.0) / KRfull_inv), 4.0);
  out.full_avg.applicable =
      nn >= 5.0 * R * h / (p.lambda * p.gamma * p.delta);
  return out;
}

/// E_t = 4 tr(A H^-2 C) + (2 c^{1/2} ||A^{1/2}|| / (3 lambda)) t, evaluated
/// from the Nystrom spectrum. A = I or A = Sigma.
inline double variance_envelope(const BoundParams& p, const KernelSpec& k,
                                const QuadratureGrid& grid, double t) {
  const auto m = static_cast<Eigen::Index>(grid.nodes.size());
  Eigen::MatrixXd A(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      A(i, j) = std::sqrt(grid.weights[i] * grid.weights[j]) *
                k.eval(grid.nodes[i], grid.nodes[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const double cscale = 2.0 * (1.0 + p.sup_inf_norm * p.sup_inf_norm);
  double tr = 0.0;
  double a_half_norm = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sig = std::max(es.eigenvalues()(i), 0.0);
    const double H = sig + p.lambda;
    const double a = p.operator_a == OperatorA::Identity ? 1.0 : sig;
    tr += a / (H * H) * cscale * sig;  // C = cscale * Sigma (upper bound)
    a_half_norm = std::max(a_half_norm, std::sqrt(a));
  }
  if (p.operator_a == OperatorA::Identity) a_half_norm = 1.0;
  return 4.0 * tr + 2.0 * p.c_half * a_half_norm / (3.0 * p.lambda) * t;
}

/// Rate exponent under the weaker margin condition:
/// n^{- alpha gamma / (2 gamma + 1 + 1/beta)} (constant omitted).
inline double weak_margin_rate(double alpha_margin, double beta_spec,
                               double gamma_src, std::size_t n) {
  if (!(alpha_margin > 0.0) || !(beta_spec > 1.0) || !(gamma_src > 0.0))
    throw std::invalid_argument("weak_margin_rate: invalid parameters");
  const double q =
      alpha_margin * gamma_src / (2.0 * gamma_src + 1.0 + 1.0 / beta_spec);
  return std::pow(static_cast<double>(n), -q);
}

struct ConcentrationPoint {
  double t;
  double empirical;     // P(|S_n| >= t) estimate
  double wilson_lower;  // 95% lower confidence limit
  double bound;         // Bernstein value at (t, a_n, b_n)
  bool ok;              // wilson_lower <= bound
};

struct ConcentrationReport {
  std::vector<ConcentrationPoint> points;
  bool all_ok = true;
};

/// Scalar bounded-martingale Monte-Carlo validator: i.i.d. zero-mean
/// increments uniform on [-a, a] (per-step variance a^2/3), so the
/// Hilbert-space bound applies with a_n = a, b_n^2 = n a^2 / 3.
inline ConcentrationReport mc_concentration_check(
    double a, std::size_t n, const std::vector<double>& t_grid,
    std::size_t reps, std::mt19937_64& rng) {
  if (reps < 1000)
    throw std::invalid_argument("mc_concentration_check: reps >= 1000");
  const double b_n = a * std::sqrt(static_cast<double>(n) / 3.0);
  std::vector<double> sums(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a * (2.0 * uniform01(rng) - 1.0);
    sums[r] = std::abs(s);
  }
  ConcentrationReport rep;
  const double z = 1.959963984540054;  // 95% two-sided normal quantile
  for (double t : t_grid) {
    std::size_t hits = 0;
    for (double s : sums)
      if (s >= t) ++hits;
    const double phat = static_cast<double>(hits) / reps;
    const double nr = static_cast<double>(reps);
    const double denom = 1.0 + z * z / nr;
    const double center = phat + z * z / (2.0 * nr);
    const double rad =
        z * std::sqrt(phat * (1.0 - phat) / nr + z * z / (4.0 * nr * nr));
    const double lower = std::max(0.0, (center - rad) / denom);
    const double bound = bernstein_tail(t, a, b_n);
    const bool ok = lower <= bound;
    rep.points.push_back({t, phat, lower, bound, ok});
    rep.all_ok = rep.all_ok && ok;
  }
  return rep;
}

}  // namespace msgd
