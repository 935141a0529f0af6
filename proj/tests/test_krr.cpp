#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "msgd/krr.hpp"
#include "msgd/metrics.hpp"

using namespace msgd;

TEST_CASE("fit_krr: normal equations hold") {
  KernelSpec k;
  MarginDistribution d(0.05, 0.1);
  std::mt19937_64 rng(3);
  const auto s = sample(d, rng, 40);
  const double lambda = 0.01;
  const auto fit = fit_krr(s, k, lambda);
  REQUIRE(fit.model.coefs.size() == 40);
  // residual of (G + n lambda I) alpha = y
  for (std::size_t i = 0; i < s.size(); ++i) {
    double gi = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j)
      gi += k.eval(s[i].x, s[j].x) * fit.model.coefs[j];
    gi += static_cast<double>(s.size()) * lambda * fit.model.coefs[i];
    CHECK(gi == doctest::Approx(static_cast<double>(s[i].y)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(fit_krr({}, k, lambda), std::invalid_argument);
  CHECK_THROWS_AS(fit_krr(s, k, 0.0), std::invalid_argument);
}

TEST_CASE("fit_krr: two-point solve against a hand computation") {
  KernelSpec k;
  std::vector<LabeledSample> s = {{0.0, +1}, {1.0, -1}};
  const double lambda = 0.1;
  const auto fit = fit_krr(s, k, lambda);
  // A = [[1+2l, e^-1],[e^-1, 1+2l]], y = (1,-1) => alpha = ±1/(1+2l-e^-1)
  const double a = 1.0 / (1.0 + 2.0 * lambda - std::exp(-1.0));
  CHECK(fit.model.coefs[0] == doctest::Approx(a).epsilon(1e-13));
  CHECK(fit.model.coefs[1] == doctest::Approx(-a).epsilon(1e-13));
}

TEST_CASE("u_n: matches the RKHS-distance oracle") {
  // u_n is ||emp - pop||_H for emp = (1/n) sum y_i K_{x_i} and
  // pop = sum_j w_j g*(z_j) K_{z_j}; rebuild both as expansions and use
  // h_dist as an independent route.
  KernelSpec k;
  MarginDistribution d(0.05, 0.15);
  const auto grid = quad_grid(d, 20, 8);
  std::mt19937_64 rng(17);
  const auto s = sample(d, rng, 60);

  HFunction emp(k);
  for (const auto& p : s) {
    emp.centers.push_back(p.x);
    emp.coefs.push_back(static_cast<double>(p.y) / s.size());
  }
  HFunction pop(k);
  for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
    pop.centers.push_back(grid.nodes[j]);
    pop.coefs.push_back(grid.weights[j] * d.bayes_regression(grid.nodes[j]));
  }
  CHECK(u_n(s, d, k, grid) == doctest::Approx(h_dist(emp, pop)).epsilon(1e-9));
  CHECK_THROWS_AS(u_n({}, d, k, grid), std::invalid_argument);
}

TEST_CASE("v_hs: quadrature-sample identity and decay") {
  KernelSpec k;
  MarginDistribution d(0.05, 0.0);
  const auto grid = quad_grid(d, 20, 8);
  // empirical measure equal to the quadrature nodes is close to rho_X but
  // unweighted, so v is strictly positive; growing n must shrink it.
  std::mt19937_64 rng(23);
  const auto s1 = sample(d, rng, 50);
  const auto s2 = sample(d, rng, 2000);
  const double v1 = v_hs(s1, k, d, grid);
  const double v2 = v_hs(s2, k, d, grid);
  CHECK(v1 > 0.0);
  CHECK(v2 < v1);
  CHECK(v2 < 0.05);  // ~ 1/sqrt(n) scale
  // permutation invariance
  auto sp = s1;
  std::reverse(sp.begin(), sp.end());
  CHECK(v_hs(sp, k, d, grid) == doctest::Approx(v1).epsilon(1e-12));
  CHECK_THROWS_AS(v_hs({}, k, d, grid), std::invalid_argument);
}

TEST_CASE("u_n decays like 1/sqrt(n) on average") {
  KernelSpec k;
  MarginDistribution d(0.05, 0.15);
  const auto grid = quad_grid(d, 20, 8);
  double m50 = 0.0, m800 = 0.0;
  const int reps = 10;
  for (int r = 0; r < reps; ++r) {
    std::mt19937_64 rng(100 + r);
    const auto s = sample(d, rng, 800);
    m800 += u_n(s, d, k, grid);
    m50 += u_n({s.begin(), s.begin() + 50}, d, k, grid);
  }
  CHECK(m800 / reps < m50 / reps);
  CHECK(m800 / reps < 0.1);
}

TEST_CASE("lemma2_gap: deviation bound holds on real fits") {
  KernelSpec k;
  MarginDistribution d(0.05, 0.1);
  const double lambda = 0.01;
  const auto grid = quad_grid(d, 20, 8);
  const auto gl = solve_glambda(d, k, lambda, grid);
  for (int r = 0; r < 5; ++r) {
    std::mt19937_64 rng(40 + r);
    const auto s = sample(d, rng, 200);
    const auto fit = fit_krr(s, k, lambda);
    const double u = u_n(s, d, k, grid);
    const double v = v_hs(s, k, d, grid);
    const auto gap = lemma2_gap(fit, gl, u, v, lambda, k.bound);
    CHECK(gap.lhs <= gap.rhs);
    CHECK(gap.lhs > 0.0);
  }
}
