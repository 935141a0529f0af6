#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "msgd/dist.hpp"
#include "msgd/kernel.hpp"

namespace msgd {

struct StepSchedule {
  enum class Kind { Constant, PowerDecay };
  Kind kind = Kind::Constant;
  double gamma = 0.25;
  double alpha = 0.0;  // only for PowerDecay, in [0,1]

  static StepSchedule constant(double g) { return {Kind::Constant, g, 0.0}; }
  static StepSchedule power(double g, double a) {
    return {Kind::PowerDecay, g, a};
  }

  // gamma_n for step n >= 1.
  double at(std::size_t n) const {
    if (kind == Kind::Constant || alpha == 0.0) return gamma;
    return gamma / std::pow(static_cast<double>(n), alpha);
  }
};

/// Regularized kernel least-squares SGD kept in coefficient space.
///
/// The iterate is g_n = c_n g0 + sum_i a_i^n K_{x_i}. One step scales all
/// existing coefficients by (1 - gamma_n lambda), updates the offset
/// multiplier c <- (1 - gamma_n lambda) c + gamma_n lambda (the lambda
/// (g_{n-1} - g0) term acts on g0's coefficient alone), and appends
/// a_n^n = -gamma_n (g_{n-1}(x_n) - y_n).
///
/// Because the decay is a uniform scaling, a_i^k = a_i^i prod_{j=i+1}^k
/// (1 - gamma_j lambda); keeping the decay prefix products P_k and their
/// running sum T_k gives tail-window partial sums in O(1) per coefficient,
/// while the full-average sums s_i are maintained incrementally (O(n) per
/// step, the same order as the step itself).
class SgdState {
 public:
  SgdState(KernelSpec k, double lambda, StepSchedule sched,
           std::shared_ptr<const HFunction> g0 = nullptr,
           bool with_averaging = true)
      : kernel_(k), lambda_(lambda), sched_(sched), g0_(std::move(g0)) {
    if (!(lambda > 0.0)) throw std::invalid_argument("SgdState: lambda > 0");
    if (!(sched_.gamma > 0.0)) throw std::invalid_argument("SgdState: gamma > 0");
    if (sched_.gamma * lambda_ >= 1.0)
      throw std::invalid_argument("SgdState: gamma*lambda must be < 1");
    if (with_averaging && sched_.kind == StepSchedule::Kind::Constant) {
      const double gamma0 =
          1.0 / (k.bound * k.bound + 2.0 * lambda_);
      if (sched_.gamma > gamma0)
        throw std::invalid_argument(
            "SgdState: constant step with averaging requires gamma <= "
            "1/(R^2 + 2 lambda)");
    }
    c_ = g0_ ? 1.0 : 0.0;
    c_prefix_.push_back(c_);  // c_0
    P_.push_back(1.0);
    T_.push_back(0.0);
  }

  std::size_t n() const { return n_; }
  double lambda() const { return lambda_; }
  const StepSchedule& schedule() const { return sched_; }
  const KernelSpec& kernel() const { return kernel_; }
  const std::vector<double>& coefs() const { return cur_; }
  const std::vector<double>& birth_coefs() const { return a_base_; }
  const std::vector<double>& decay_products() const { return P_; }
  double offset_multiplier() const { return c_; }

  double eval_iterate(double x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < centers_.size(); ++i)
      v += cur_[i] * kernel_.eval(centers_[i], x);
    if (g0_ && c_ != 0.0) v += c_ * g0_->eval(x);
    return v;
  }

  void step(const LabeledSample& s) {
    advance(s.x, static_cast<double>(s.y), /*homogeneous=*/false);
  }

  /// Noise-free recursion eta_n = (I - gamma_n (K_x (x) K_x + lambda I))
  /// eta_{n-1}; the starting eta_0 is the supplied g0.
  void homogeneous_step(double x) { advance(x, 0.0, /*homogeneous=*/true); }

  HFunction iterate_fn() const {
    HFunction f(kernel_, centers_, cur_);
    attach_offset(f, c_);
    return f;
  }

  /// Average of g_0 ... g_n (n+1 terms).
  HFunction averaged_fn() const {
    if (n_ < 1) throw std::invalid_argument("averaged_fn: n >= 1");
    const double inv = 1.0 / static_cast<double>(n_ + 1);
    std::vector<double> a(n_);
    for (std::size_t i = 0; i < n_; ++i) a[i] = s_[i] * inv;
    HFunction f(kernel_, centers_, std::move(a));
    attach_offset(f, c_prefix_[n_] * inv);
    return f;
  }

  /// Tail window is indices floor(n/2) .. n inclusive, normalized by
  /// floor(n/2). This matches the published coefficient formula; the clean
  /// identity tail = 2 avg_n - avg_{n/2} holds for the shifted window
  /// n/2+1 .. n, so reconstruction tests go through prefix sums instead
  /// (see tail_from_prefix below).
  HFunction tail_averaged_fn() const {
    if (n_ < 2) throw std::invalid_argument("tail_averaged_fn: n >= 2");
    const std::size_t m = n_ / 2;
    const double inv = 1.0 / static_cast<double>(m);
    std::vector<double> a(n_);
    const double tail_T = T_[n_] - T_[m - 1];
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t idx = i + 1;  // birth step of coefficient i
      if (idx <= m)
        a[i] = a_base_[i] / P_[idx] * tail_T * inv;
      else
        a[i] = s_[i] * inv;
    }
    HFunction f(kernel_, centers_, std::move(a));
    attach_offset(f, (c_prefix_[n_] - c_prefix_[m - 1]) * inv);
    return f;
  }

  /// Independent route to the tail average: window sums reconstructed from
  /// the incrementally maintained full-average sums,
  ///   sum_{k=m}^n g_k = (n+1) avg_n - m avg_{m-1},
  /// with avg_{m-1} taken from a snapshot of this state at step m-1.
  static HFunction tail_from_prefix(const HFunction& avg_n, std::size_t n,
                                    const HFunction& avg_m_minus_1,
                                    std::size_t m) {
    if (m < 1) throw std::invalid_argument("tail_from_prefix: m >= 1");
    HFunction f(avg_n.kernel);
    f.centers = avg_n.centers;
    f.coefs.assign(avg_n.coefs.size(), 0.0);
    const double cn = static_cast<double>(n + 1) / static_cast<double>(m);
    for (std::size_t i = 0; i < avg_n.coefs.size(); ++i)
      f.coefs[i] = cn * avg_n.coefs[i];
    for (std::size_t i = 0; i < avg_m_minus_1.coefs.size(); ++i)
      f.coefs[i] -= avg_m_minus_1.coefs[i];  // m * avg / m
    f.offset_fn = avg_n.offset_fn;
    f.offset_scale = cn * avg_n.offset_scale - avg_m_minus_1.offset_scale;
    return f;
  }

 private:
  void attach_offset(HFunction& f, double scale) const {
    if (g0_ && scale != 0.0) {
      f.offset_fn = g0_;
      f.offset_scale = scale;
    }
  }

  void advance(double x, double y, bool homogeneous) {
    const std::size_t next = n_ + 1;
    const double gamma = sched_.at(next);
    const double decay = 1.0 - gamma * lambda_;
    const double pred = eval_iterate(x);
    for (double& a : cur_) a *= decay;
    if (g0_) {
      c_ *= decay;
      if (!homogeneous) c_ += gamma * lambda_;
    }
    const double a_new = -gamma * (pred - y);
    centers_.push_back(x);
    a_base_.push_back(a_new);
    cur_.push_back(a_new);
    s_.push_back(0.0);
    P_.push_back(P_[n_] * decay);
    T_.push_back(T_[n_] + P_[next]);
    n_ = next;
    for (std::size_t i = 0; i < n_; ++i) s_[i] += cur_[i];
    c_prefix_.push_back(c_prefix_[n_ - 1] + c_);
  }

  KernelSpec kernel_;
  double lambda_;
  StepSchedule sched_;
  std::shared_ptr<const HFunction> g0_;
  std::size_t n_ = 0;
  double c_ = 0.0;
  std::vector<double> centers_;
  std::vector<double> a_base_;  // a_i^i
  std::vector<double> cur_;     // a_i^n
  std::vector<double> s_;       // sum_{k=i}^n a_i^k
  std::vector<double> P_;       // P_k = prod_{j<=k} (1-gamma_j lambda)
  std::vector<double> T_;       // T_k = sum_{j<=k} P_j
  std::vector<double> c_prefix_;  // sum_{k=0}^n c_k
};

struct Snapshot {
  std::size_t n;
  HFunction plain;
  HFunction averaged;
  HFunction tail;  // empty expansion when n < 2
};

struct RunRecord {
  std::vector<Snapshot> snapshots;
  std::vector<LabeledSample> samples;
};

inline RunRecord run(SgdState& state, const MarginDistribution& d,
                     std::mt19937_64& rng, std::size_t n,
                     const std::vector<std::size_t>& checkpoints) {
  for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i)
    if (checkpoints[i] > checkpoints[i + 1])
      throw std::invalid_argument("run: checkpoints must be ascending");
  if (!checkpoints.empty() && checkpoints.back() > n)
    throw std::invalid_argument("run: checkpoint beyond n");
  RunRecord rec;
  rec.samples.reserve(n);
  std::size_t ci = 0;
  for (std::size_t step = 1; step <= n; ++step) {
    const LabeledSample s = sample_one(d, rng);
    rec.samples.push_back(s);
    state.step(s);
    while (ci < checkpoints.size() && checkpoints[ci] == step) {
      Snapshot snap{step, state.iterate_fn(),
                    step >= 1 ? state.averaged_fn() : HFunction(state.kernel()),
                    step >= 2 ? state.tail_averaged_fn()
                              : HFunction(state.kernel())};
      rec.snapshots.push_back(std::move(snap));
      ++ci;
    }
  }
  return rec;
}

}  // namespace msgd
