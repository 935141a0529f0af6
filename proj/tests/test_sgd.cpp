#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "msgd/sgd.hpp"

using namespace msgd;

namespace {

/// Pointwise-value replay of the SGD recursion, independent of SgdState's
/// coefficient bookkeeping. It records the scalar update
/// u_n = -gamma_n (g_{n-1}(x_n) - y_n) per step and evaluates any point by
/// replaying
///   g_n(z) = (1 - gamma_n lambda) g_{n-1}(z) + u_n K(x_n, z)
///            + gamma_n lambda g0(z)
/// from scratch, while tracking running values on a fixed probe grid.
struct ValueReplay {
  KernelSpec k;
  double lambda;
  StepSchedule sched;
  const HFunction* g0;
  std::vector<double> probe;
  std::vector<double> vals;                  // current iterate at probe
  std::vector<double> avg_sums;              // sum over iterates 0..n at probe
  std::vector<std::vector<double>> history;  // iterate values at probe, per n
  std::vector<double> xs, updates, gammas;
  std::size_t n = 0;

  ValueReplay(KernelSpec kk, double l, StepSchedule s, const HFunction* g,
              std::vector<double> p)
      : k(kk), lambda(l), sched(s), g0(g), probe(std::move(p)) {
    vals.resize(probe.size());
    for (std::size_t i = 0; i < probe.size(); ++i)
      vals[i] = g0 ? g0->eval(probe[i]) : 0.0;
    avg_sums = vals;
    history.push_back(vals);
  }

  double iterate_at(double z) const {
    double v = g0 ? g0->eval(z) : 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s)
      v = (1.0 - gammas[s] * lambda) * v + updates[s] * k.eval(xs[s], z) +
          (g0 ? gammas[s] * lambda * g0->eval(z) : 0.0);
    return v;
  }

  void step(double x, double y) {
    const double gamma = sched.at(n + 1);
    const double u = -gamma * (iterate_at(x) - y);
    for (std::size_t i = 0; i < probe.size(); ++i)
      vals[i] = (1.0 - gamma * lambda) * vals[i] + u * k.eval(x, probe[i]) +
                (g0 ? gamma * lambda * g0->eval(probe[i]) : 0.0);
    xs.push_back(x);
    updates.push_back(u);
    gammas.push_back(gamma);
    ++n;
    for (std::size_t i = 0; i < probe.size(); ++i) avg_sums[i] += vals[i];
    history.push_back(vals);
  }
};

}  // namespace

TEST_CASE("schedule: constant and power values") {
  auto c = StepSchedule::constant(0.25);
  CHECK(c.at(1) == 0.25);
  CHECK(c.at(1000) == 0.25);
  auto p = StepSchedule::power(0.25, 0.5);
  CHECK(p.at(1) == 0.25);
  CHECK(p.at(4) == doctest::Approx(0.125));
  CHECK(p.at(100) == doctest::Approx(0.025));
  auto p0 = StepSchedule::power(0.25, 0.0);
  CHECK(p0.at(7) == 0.25);
}

TEST_CASE("constructor validation") {
  KernelSpec k;
  CHECK_THROWS_AS(SgdState(k, 0.0, StepSchedule::constant(0.25)),
                  std::invalid_argument);
  CHECK_THROWS_AS(SgdState(k, 5.0, StepSchedule::constant(0.25)),
                  std::invalid_argument);
  // constant step with averaging needs gamma <= 1/(R^2 + 2 lambda)
  CHECK_THROWS_AS(SgdState(k, 0.01, StepSchedule::constant(0.999)),
                  std::invalid_argument);
  // without averaging the larger step is allowed
  CHECK_NOTHROW(SgdState(k, 0.01, StepSchedule::constant(0.999), nullptr,
                         /*with_averaging=*/false));
}

TEST_CASE("iterate, average, and tail match the pointwise-value replay") {
  KernelSpec k;
  MarginDistribution d(0.05, 0.1);
  const double lambda = 0.01;
  for (int mode = 0; mode < 2; ++mode) {
    const auto sched = mode == 0 ? StepSchedule::constant(0.25)
                                 : StepSchedule::power(0.25, 0.5);
    auto g0 = std::make_shared<HFunction>(k, std::vector<double>{0.1, 0.7},
                                          std::vector<double>{0.3, -0.2});
    SgdState st(k, lambda, sched, g0);
    std::vector<double> probe;
    for (int i = 0; i <= 10; ++i) probe.push_back(i / 10.0);
    ValueReplay rp(k, lambda, sched, g0.get(), probe);
    std::mt19937_64 rng(31 + mode);
    for (int s = 0; s < 40; ++s) {
      const auto smp = sample_one(d, rng);
      st.step(smp);
      rp.step(smp.x, static_cast<double>(smp.y));
      const auto f = st.iterate_fn();
      for (std::size_t i = 0; i < probe.size(); ++i)
        CHECK(f.eval(probe[i]) ==
              doctest::Approx(rp.vals[i]).epsilon(1e-11).scale(1.0));
    }
    const auto favg = st.averaged_fn();
    for (std::size_t i = 0; i < probe.size(); ++i)
      CHECK(favg.eval(probe[i]) ==
            doctest::Approx(rp.avg_sums[i] / (rp.n + 1.0))
                .epsilon(1e-11)
                .scale(1.0));
    const std::size_t n = rp.n, m = n / 2;
    const auto ftail = st.tail_averaged_fn();
    for (std::size_t i = 0; i < probe.size(); ++i) {
      double ws = 0.0;
      for (std::size_t j = m; j <= n; ++j) ws += rp.history[j][i];
      CHECK(ftail.eval(probe[i]) ==
            doctest::Approx(ws / m).epsilon(1e-11).scale(1.0));
    }
  }
}

TEST_CASE("tail_from_prefix reconstruction agrees coefficientwise") {
  KernelSpec k;
  MarginDistribution d(0.05, 0.0);
  SgdState st(k, 0.01, StepSchedule::constant(0.25));
  std::mt19937_64 rng(71);
  const std::size_t n = 60, m = n / 2;
  HFunction avg_m1;
  for (std::size_t s = 1; s <= n; ++s) {
    st.step(sample_one(d, rng));
    if (s == m - 1) avg_m1 = st.averaged_fn();
  }
  const auto direct = st.tail_averaged_fn();
  auto recon = SgdState::tail_from_prefix(st.averaged_fn(), n, avg_m1, m);
  REQUIRE(recon.coefs.size() == direct.coefs.size());
  for (std::size_t i = 0; i < direct.coefs.size(); ++i)
    CHECK(recon.coefs[i] ==
          doctest::Approx(direct.coefs[i]).epsilon(1e-12).scale(1.0));
  CHECK_THROWS_AS(SgdState::tail_from_prefix(direct, n, avg_m1, 0),
                  std::invalid_argument);
}

TEST_CASE("homogeneous recursion contracts at the deterministic rate") {
  KernelSpec k;
  const double lambda = 0.01;
  auto g0 = std::make_shared<HFunction>(k, std::vector<double>{0.2, 0.9},
                                        std::vector<double>{1.0, -0.5});
  const double norm0 = h_norm(*g0);
  for (int mode = 0; mode < 2; ++mode) {
    const auto sched = mode == 0 ? StepSchedule::constant(0.25)
                                 : StepSchedule::power(0.25, 0.75);
    SgdState st(k, lambda, sched, g0, /*with_averaging=*/false);
    std::mt19937_64 rng(5 + mode);
    double prod = 1.0;
    for (int s = 1; s <= 50; ++s) {
      st.homogeneous_step(uniform01(rng));
      prod *= 1.0 - sched.at(s) * lambda;
      CHECK(h_norm(st.iterate_fn()) <= prod * norm0 * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("guards on the averaged accessors") {
  KernelSpec k;
  SgdState st(k, 0.01, StepSchedule::constant(0.25));
  CHECK_THROWS_AS(st.averaged_fn(), std::invalid_argument);
  CHECK_THROWS_AS(st.tail_averaged_fn(), std::invalid_argument);
  MarginDistribution d(0.05, 0.0);
  std::mt19937_64 rng(1);
  st.step(sample_one(d, rng));
  CHECK_NOTHROW(st.averaged_fn());
  CHECK_THROWS_AS(st.tail_averaged_fn(), std::invalid_argument);
}

TEST_CASE("run: checkpoints, determinism, validation") {
  KernelSpec k;
  MarginDistribution d(0.05, 0.1);
  std::mt19937_64 a(9), b(9);
  SgdState s1(k, 0.01, StepSchedule::constant(0.25));
  SgdState s2(k, 0.01, StepSchedule::constant(0.25));
  const std::vector<std::size_t> cps = {5, 10, 20};
  const auto r1 = run(s1, d, a, 20, cps);
  const auto r2 = run(s2, d, b, 20, cps);
  REQUIRE(r1.snapshots.size() == 3);
  CHECK(r1.samples.size() == 20);
  for (std::size_t c = 0; c < cps.size(); ++c) {
    CHECK(r1.snapshots[c].n == cps[c]);
    CHECK(r1.snapshots[c].plain.eval(0.3) == r2.snapshots[c].plain.eval(0.3));
  }
  SgdState s3(k, 0.01, StepSchedule::constant(0.25));
  CHECK_THROWS_AS(run(s3, d, a, 20, {10, 5}), std::invalid_argument);
  SgdState s4(k, 0.01, StepSchedule::constant(0.25));
  CHECK_THROWS_AS(run(s4, d, a, 20, {25}), std::invalid_argument);
}
