#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "msgd/dist.hpp"
#include "msgd/kernel.hpp"
#include "msgd/popridge.hpp"

namespace msgd {

// sign u = +1 for u >= 0.
inline int sign01(double u) { return u >= 0.0 ? +1 : -1; }

/// Excess 0-1 risk (1-2p) * rho_X{ sign g != sign g* }, computed
/// semi-analytically: scan a uniform grid per support interval for sign
/// changes of g, bisect each bracketed root to 1e-12, and sum exact
/// interval measures under the uniform density. Monte-Carlo test sets
/// cannot resolve the ~1e-6 errors the exponential rate produces.
inline double excess_risk_01(const HFunction& g, const MarginDistribution& d,
                             int resolution = 512) {
  if (resolution < 64)
    throw std::invalid_argument("excess_risk_01: resolution >= 64");
  const double dens = 1.0 / (1.0 - d.epsilon);
  const double ivals[2][2] = {{0.0, d.s_plus_hi()}, {d.s_minus_lo(), 1.0}};
  double bad_len = 0.0;
  for (const auto& iv : ivals) {
    const int gstar_sign = sign01(d.bayes_regression(0.5 * (iv[0] + iv[1])));
    const double h = (iv[1] - iv[0]) / resolution;
    double x_prev = iv[0];
    bool bad_prev = sign01(g.eval(x_prev)) != gstar_sign;
    double seg_start = bad_prev ? x_prev : 0.0;
    for (int i = 1; i <= resolution; ++i) {
      const double x = (i == resolution) ? iv[1] : iv[0] + i * h;
      const bool bad = sign01(g.eval(x)) != gstar_sign;
      if (bad != bad_prev) {
        // g crosses 0 in (x_prev, x): bisect the boundary.
        double lo = x_prev, hi = x;
        for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((sign01(g.eval(mid)) != gstar_sign) == bad_prev)
            lo = mid;
          else
            hi = mid;
        }
        const double root = 0.5 * (lo + hi);
        if (bad_prev)
          bad_len += root - seg_start;
        else
          seg_start = root;
        bad_prev = bad;
      }
      x_prev = x;
    }
    if (bad_prev) bad_len += iv[1] - seg_start;
  }
  return d.delta() * bad_len * dens;
}

inline double risk_01(const HFunction& g, const MarginDistribution& d,
                      int resolution = 512) {
  return d.bayes_risk() + excess_risk_01(g, d, resolution);
}

/// Weighted L2 distance to a reference function on the quadrature grid.
inline double l2_loss(const HFunction& g,
                      const std::function<double(double)>& ref,
                      const QuadratureGrid& grid) {
  return grid.integrate_fn(
      [&](double z) { const double e = g.eval(z) - ref(z); return e * e; });
}

struct TrainMetrics {
  double error;
  double loss;
};

inline TrainMetrics train_metrics(const HFunction& g,
                                  const std::vector<LabeledSample>& samples) {
  if (samples.empty())
    throw std::invalid_argument("train_metrics: empty sample list");
  std::vector<double> sq(samples.size());
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = g.eval(samples[i].x);
    if (sign01(v) != samples[i].y) ++wrong;
    const double e = v - samples[i].y;
    sq[i] = e * e;
  }
  return {static_cast<double>(wrong) / samples.size(),
          pairwise_sum(sq) / samples.size()};
}

struct EvalReport {
  double excess_risk_01 = 0.0;
  double risk_01 = 0.0;
  double l2_loss_vs_glambda = 0.0;
  double l2_loss_vs_gstar = 0.0;
  double h_dist_vs_glambda = 0.0;
  double train_error = 0.0;
  double train_loss = 0.0;
};

inline EvalReport evaluate(const HFunction& g, const MarginDistribution& d,
                           const HFunction& g_lambda,
                           const QuadratureGrid& grid,
                           const std::vector<LabeledSample>& train,
                           int resolution = 512) {
  EvalReport r;
  r.excess_risk_01 = excess_risk_01(g, d, resolution);
  r.risk_01 = d.bayes_risk() + r.excess_risk_01;
  r.l2_loss_vs_glambda =
      l2_loss(g, [&](double z) { return g_lambda.eval(z); }, grid);
  r.l2_loss_vs_gstar =
      l2_loss(g, [&](double z) { return d.bayes_regression(z); }, grid);
  r.h_dist_vs_glambda = h_dist(g, g_lambda);
  if (!train.empty()) {
    const auto tm = train_metrics(g, train);
    r.train_error = tm.error;
    r.train_loss = tm.loss;
  }
  return r;
}

}  // namespace msgd
