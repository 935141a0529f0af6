#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "msgd/dist.hpp"
#include "msgd/kernel.hpp"
#include "msgd/popridge.hpp"

namespace msgd {

/// Kernel ridge regression fit: alpha solves (G + n lambda I) alpha = y.
struct KrrFit {
  HFunction model;
  double lambda;
  std::size_t n;
};

inline KrrFit fit_krr(const std::vector<LabeledSample>& samples,
                      const KernelSpec& k, double lambda) {
  if (samples.empty()) throw std::invalid_argument("fit_krr: empty samples");
  if (!(lambda > 0.0)) throw std::invalid_argument("fit_krr: lambda > 0");
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd G(n, n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = samples[static_cast<std::size_t>(i)].y;
    for (Eigen::Index j = 0; j < n; ++j)
      G(i, j) = k.eval(samples[static_cast<std::size_t>(i)].x,
                       samples[static_cast<std::size_t>(j)].x);
  }
  Eigen::MatrixXd A = G;
  A.diagonal().array() += static_cast<double>(n) * lambda;
  const Eigen::VectorXd alpha = A.ldlt().solve(y);
  KrrFit fit{HFunction(k), lambda, samples.size()};
  fit.model.centers.resize(samples.size());
  fit.model.coefs.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    fit.model.centers[i] = samples[i].x;
    fit.model.coefs[i] = alpha(static_cast<Eigen::Index>(i));
  }
  return fit;
}

/// u_n = || (1/n) sum_i y_i K_{x_i} - E[y K_x] ||_H, with the population
/// term E[y K_x] = E[g*(x) K_x] evaluated by quadrature:
///   u_n^2 = (1/n^2) sum_ij y_i y_j K(x_i,x_j) - (2/n) sum_i y_i q(x_i) + Q,
/// q(x) = sum_j w_j g*(z_j) K(z_j,x), Q = sum_jl w_j w_l g*(z_j) g*(z_l) K(z_j,z_l).
inline double u_n(const std::vector<LabeledSample>& samples,
                  const MarginDistribution& d, const KernelSpec& k,
                  const QuadratureGrid& grid) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("u_n: empty samples");
  const std::size_t m = grid.nodes.size();
  std::vector<double> gstar(m);
  for (std::size_t j = 0; j < m; ++j)
    gstar[j] = d.bayes_regression(grid.nodes[j]);

  std::vector<double> rows(n);
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      terms[j] = samples[j].y * k.eval(samples[i].x, samples[j].x);
    rows[i] = samples[i].y * pairwise_sum(terms);
  }
  const double empirical = pairwise_sum(rows) / (static_cast<double>(n) * n);

  std::vector<double> cross(n);
  std::vector<double> qterms(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      qterms[j] = grid.weights[j] * gstar[j] * k.eval(grid.nodes[j], samples[i].x);
    cross[i] = samples[i].y * pairwise_sum(qterms);
  }
  const double mixed = pairwise_sum(cross) / static_cast<double>(n);

  std::vector<double> qrows(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l)
      qterms[l] = grid.weights[l] * gstar[l] * k.eval(grid.nodes[j], grid.nodes[l]);
    qrows[j] = grid.weights[j] * gstar[j] * pairwise_sum(qterms);
  }
  const double Q = pairwise_sum(qrows);

  const double sq = empirical - 2.0 * mixed + Q;
  return std::sqrt(sq < 0.0 ? 0.0 : sq);
}

/// Hilbert-Schmidt norm of Sigma - Sigma_hat; dominates the operator norm
/// v_n used in the deviation bound, and is computable in closed form:
///   v^2 = integral K(x,x')^2 - (2/n) sum_i int K(x_i,.)^2 + (1/n^2) sum_ij K(x_i,x_j)^2.
inline double v_hs(const std::vector<LabeledSample>& samples,
                   const KernelSpec& k, const MarginDistribution& d,
                   const QuadratureGrid& grid) {
  (void)d;
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("v_hs: empty samples");
  const std::size_t m = grid.nodes.size();

  std::vector<double> rows(m), terms(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) {
      const double kk = k.eval(grid.nodes[j], grid.nodes[l]);
      terms[l] = grid.weights[l] * kk * kk;
    }
    rows[j] = grid.weights[j] * pairwise_sum(terms);
  }
  const double pop = pairwise_sum(rows);

  std::vector<double> cross(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < m; ++l) {
      const double kk = k.eval(samples[i].x, grid.nodes[l]);
      terms[l] = grid.weights[l] * kk * kk;
    }
    cross[i] = pairwise_sum(terms);
  }
  const double mixed = pairwise_sum(cross) / static_cast<double>(n);

  std::vector<double> erows(n), eterms(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double kk = k.eval(samples[i].x, samples[j].x);
      eterms[j] = kk * kk;
    }
    erows[i] = pairwise_sum(eterms);
  }
  const double emp = pairwise_sum(erows) / (static_cast<double>(n) * n);

  const double sq = pop - 2.0 * mixed + emp;
  return std::sqrt(sq < 0.0 ? 0.0 : sq);
}

struct Lemma2Gap {
  double lhs;
  double rhs;
};

/// lhs = ||g_hat - g_lambda||_H, rhs = u/lambda + R v/lambda^2.
inline Lemma2Gap lemma2_gap(const KrrFit& fit, const HFunction& g_lambda,
                            double u, double v, double lambda, double R) {
  return {h_dist(fit.model, g_lambda), u / lambda + R * v / (lambda * lambda)};
}

}  // namespace msgd
