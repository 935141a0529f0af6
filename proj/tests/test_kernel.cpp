#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "msgd/kernel.hpp"

using namespace msgd;

namespace {
const KernelSpec kexp{KernelKind::Exponential, 1.0, 1.0};

HFunction random_expansion(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> ux(0.0, 1.0), ua(-2.0, 2.0);
  HFunction f(kexp);
  for (std::size_t i = 0; i < n; ++i) {
    f.centers.push_back(ux(rng));
    f.coefs.push_back(ua(rng));
  }
  return f;
}
}  // namespace

TEST_CASE("kernel eval: direct formula, symmetry, bounds") {
  CHECK(kexp.eval(0.3, 0.3) == 1.0);
  CHECK(kexp.eval(0.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const KernelSpec k2{KernelKind::Exponential, 2.0, 1.0};
  CHECK(k2.eval(0.0, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), y = u(rng);
    CHECK(kexp.eval(x, y) == kexp.eval(y, x));  // exact
    CHECK(kexp.eval(x, y) > 0.0);
    CHECK(kexp.eval(x, y) <= 1.0);
    CHECK(kexp.eval(x, x) == 1.0);
  }
}

TEST_CASE("gram: examples and PSD via independent eigensolve") {
  CHECK(gram(kexp, std::vector{0.0}, std::vector{0.0})(0, 0) == 1.0);

  const std::vector<double> pts{0.0, 1.0};
  const auto g = gram(kexp, pts, pts);
  CHECK(g(0, 1) == doctest::Approx(std::exp(-1.0)));
  CHECK(g(1, 0) == g(0, 1));

  const std::vector<double> tri{0.0, 0.5, 1.0};
  const auto g3 = gram(kexp, tri, tri);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g3);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  CHECK_THROWS_AS(gram(kexp, std::vector<double>{}, pts), std::invalid_argument);

  // n random distinct points: smallest eigenvalue >= -1e-10
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(u(rng));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(gram(kexp, xs, xs));
  CHECK(es2.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("h_inner: hand-expanded quadratics") {
  HFunction kx(kexp, {0.3}, {1.0});
  CHECK(h_inner(kx, kx) == doctest::Approx(1.0).epsilon(1e-15));

  HFunction f(kexp, {0.0, 1.0}, {1.0, -1.0});
  CHECK(h_inner(f, f) ==
        doctest::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-14));

  HFunction zero(kexp);
  CHECK(h_inner(f, zero) == 0.0);

  const KernelSpec other{KernelKind::Exponential, 2.0, 1.0};
  HFunction g(other, {0.5}, {1.0});
  CHECK_THROWS_AS(h_inner(f, g), std::invalid_argument);
}

TEST_CASE("h_dist: examples and triangle inequality") {
  HFunction f(kexp, {0.0, 1.0}, {1.0, -1.0});
  CHECK(h_dist(f, f) == 0.0);

  HFunction k0(kexp, {0.0}, {1.0}), k1(kexp, {1.0}, {1.0});
  CHECK(h_dist(k0, k1) ==
        doctest::Approx(std::sqrt(2.0 - 2.0 * std::exp(-1.0))).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_expansion(rng, 4);
    const auto b = random_expansion(rng, 3);
    const auto c = random_expansion(rng, 5);
    CHECK(h_dist(a, c) <= h_dist(a, b) + h_dist(b, c) + 1e-12);
  }
}

TEST_CASE("reproducing property and sup-norm domination") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const auto f = random_expansion(rng, 6);
    const double x = u(rng);
    HFunction kx(kexp, {x}, {1.0});
    CHECK(f.eval(x) == doctest::Approx(h_inner(f, kx)).epsilon(1e-12));
    CHECK(std::abs(f.eval(x)) <= kexp.bound * h_norm(f) + 1e-12);
  }
}

TEST_CASE("offset flattening preserves eval; norm zero iff zero coefs") {
  auto base = std::make_shared<HFunction>(kexp, std::vector{0.2, 0.8},
                                          std::vector{1.5, -0.5});
  HFunction f(kexp, {0.4}, {2.0});
  f.offset_fn = base;
  f.offset_scale = 0.7;
  const auto flat = f.flattened();
  for (double x : {0.0, 0.25, 0.5, 0.9, 1.0})
    CHECK(f.eval(x) == doctest::Approx(flat.eval(x)).epsilon(1e-12));
  CHECK(flat.centers.size() == 3);

  HFunction z(kexp, {0.1, 0.9}, {0.0, 0.0});
  CHECK(h_norm(z) == 0.0);
  CHECK(h_norm(f) > 0.0);
}
