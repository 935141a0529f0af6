#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "msgd/dist.hpp"
#include "msgd/kernel.hpp"

namespace msgd {

/// Gauss-Legendre nodes/weights on [-1,1], order q, by Newton iteration on
/// the Legendre polynomial.
inline void gauss_legendre(int q, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  if (q < 2) throw std::invalid_argument("gauss_legendre: order >= 2");
  nodes.assign(q, 0.0);
  weights.assign(q, 0.0);
  const int m = (q + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= q; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[q - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[q - 1 - i] = w;
  }
}

/// Composite Gauss-Legendre rule over the two support intervals with the
/// density folded into the weights, so sums against it are integrals
/// against rho_X.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  double integrate(const std::vector<double>& values) const {
    std::vector<double> terms(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j)
      terms[j] = weights[j] * values[j];
    return pairwise_sum(terms);
  }

  template <class F>
  double integrate_fn(F&& f) const {
    std::vector<double> terms(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j)
      terms[j] = weights[j] * f(nodes[j]);
    return pairwise_sum(terms);
  }
};

inline QuadratureGrid quad_grid(const MarginDistribution& d, int panels,
                                int order) {
  if (panels < 1) throw std::invalid_argument("quad_grid: panels >= 1");
  std::vector<double> gn, gw;
  gauss_legendre(order, gn, gw);
  QuadratureGrid grid;
  const double dens = 1.0 / (1.0 - d.epsilon);
  const double ivals[2][2] = {{0.0, d.s_plus_hi()}, {d.s_minus_lo(), 1.0}};
  for (const auto& iv : ivals) {
    const double h = (iv[1] - iv[0]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double a = iv[0] + p * h;
      for (int j = 0; j < order; ++j) {
        grid.nodes.push_back(a + 0.5 * h * (gn[j] + 1.0));
        grid.weights.push_back(0.5 * h * gw[j] * dens);
      }
    }
  }
  return grid;
}

/// Population ridge solution g_lambda by the Nystrom method: discretize
/// the optimality equation
///   int K(x,z) g(x) drho(x) + lambda g(z) = int K(x,z) g*(x) drho(x)
/// on the grid, solve for the nodal values v, and extend off-grid through
/// g(z) = (1/lambda) sum_j w_j K(z_j,z) (g*(z_j) - v_j), which is an
/// element of H by construction.
inline HFunction solve_glambda(const MarginDistribution& d,
                               const KernelSpec& k, double lambda,
                               const QuadratureGrid& grid) {
  if (!(lambda > 0.0)) throw std::invalid_argument("solve_glambda: lambda > 0");
  const auto m = static_cast<Eigen::Index>(grid.nodes.size());
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double bi = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double kij = k.eval(grid.nodes[j], grid.nodes[i]);
      A(i, j) = grid.weights[j] * kij;
      bi += grid.weights[j] * kij * d.bayes_regression(grid.nodes[j]);
    }
    A(i, i) += lambda;
    b(i) = bi;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd v = lu.solve(b);
  if (!v.allFinite())
    throw std::runtime_error("solve_glambda: singular Nystrom system");
  HFunction g(k);
  g.centers = grid.nodes;
  g.coefs.resize(grid.nodes.size());
  for (Eigen::Index j = 0; j < m; ++j)
    g.coefs[static_cast<std::size_t>(j)] =
        grid.weights[j] * (d.bayes_regression(grid.nodes[j]) - v(j)) / lambda;
  return g;
}

/// Sup over test points of the optimality-equation residual of g,
/// with the integral evaluated on the solve grid.
inline double optimality_residual(const HFunction& g,
                                  const MarginDistribution& d,
                                  const KernelSpec& k, double lambda,
                                  const QuadratureGrid& grid,
                                  const std::vector<double>& test_points) {
  std::vector<double> gv(grid.nodes.size()), rv(grid.nodes.size());
  for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
    gv[j] = g.eval(grid.nodes[j]);
    rv[j] = d.bayes_regression(grid.nodes[j]);
  }
  double worst = 0.0;
  std::vector<double> terms(grid.nodes.size());
  for (double z : test_points) {
    for (std::size_t j = 0; j < grid.nodes.size(); ++j)
      terms[j] = grid.weights[j] * k.eval(grid.nodes[j], z) * (gv[j] - rv[j]);
    const double r = pairwise_sum(terms) + lambda * g.eval(z);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// Uniform probe grid with `per_interval` points on each support interval.
inline std::vector<double> support_probe(const MarginDistribution& d,
                                         int per_interval) {
  if (per_interval < 2)
    throw std::invalid_argument("support_probe: >= 2 points per interval");
  std::vector<double> pts;
  pts.reserve(2 * static_cast<std::size_t>(per_interval));
  const double ivals[2][2] = {{0.0, d.s_plus_hi()}, {d.s_minus_lo(), 1.0}};
  for (const auto& iv : ivals)
    for (int i = 0; i < per_interval; ++i)
      pts.push_back(iv[0] + (iv[1] - iv[0]) * i / (per_interval - 1));
  return pts;
}

struct MarginCheck {
  double min_margin;
  bool sign_ok;
};

/// min over a probe grid of sign(g*(x)) g(x); the A5-style margin is
/// certified when this stays above delta/2.
inline MarginCheck margin_delta(const HFunction& g,
                                const MarginDistribution& d,
                                int probe_per_interval) {
  const auto pts = support_probe(d, probe_per_interval);
  double mn = std::numeric_limits<double>::infinity();
  for (double x : pts) {
    const double s = d.bayes_regression(x) >= 0.0 ? 1.0 : -1.0;
    mn = std::min(mn, s * g.eval(x));
  }
  return {mn, mn > 0.0};
}

}  // namespace msgd
