#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "msgd/bounds.hpp"
#include "msgd/dist.hpp"
#include "msgd/kernel.hpp"
#include "msgd/krr.hpp"
#include "msgd/metrics.hpp"
#include "msgd/popridge.hpp"
#include "msgd/sgd.hpp"
#include "msgd/util.hpp"

namespace msgd {

enum class Estimator { Plain, Averaged, Tail, Krr };

struct ExperimentConfig {
  double epsilon = 0.05;
  double flip_p = 0.0;
  double sigma = 1.0;  // kernel scale
  double lambda = 0.01;
  StepSchedule schedule = StepSchedule::constant(0.25);
  std::size_t n_max = 200;
  std::vector<std::size_t> checkpoints;  // default: 10,20,...,n_max
  std::size_t replications = 1000;
  std::uint64_t base_seed = 1;
  int grid_panels = 20;
  int grid_order = 8;
  int resolution = 512;  // excess-risk scan points per interval
  Estimator estimator = Estimator::Tail;
  std::string out_path;
  int jobs = 0;  // 0: hardware concurrency

  void validate() const {
    MarginDistribution d(epsilon, flip_p);  // throws on bad epsilon/flip_p
    (void)d;
    if (!(sigma > 0.0)) throw std::invalid_argument("config: sigma > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("config: lambda > 0");
    if (!(schedule.gamma > 0.0)) throw std::invalid_argument("config: gamma > 0");
    if (schedule.gamma * lambda >= 1.0)
      throw std::invalid_argument("config: gamma*lambda must be < 1");
    if (n_max < 1) throw std::invalid_argument("config: n >= 1");
    if (replications < 1) throw std::invalid_argument("config: reps >= 1");
    if (grid_panels < 1 || grid_order < 2)
      throw std::invalid_argument("config: grid panels >= 1, order >= 2");
    if (estimator == Estimator::Krr && n_max > 4000)
      throw std::invalid_argument("config: krr caps n at 4000");
  }

  std::vector<std::size_t> effective_checkpoints() const {
    if (!checkpoints.empty()) return checkpoints;
    std::vector<std::size_t> cp;
    const std::size_t stride = std::max<std::size_t>(1, n_max / 20);
    for (std::size_t c = stride; c <= n_max; c += stride) cp.push_back(c);
    if (cp.empty() || cp.back() != n_max) cp.push_back(n_max);
    return cp;
  }
};

struct AggregateRecord {
  std::size_t n = 0;
  double mean_excess_error = 0.0;
  double mean_l2_loss = 0.0;
  double mean_train_error = 0.0;
  double mean_train_loss = 0.0;
  double mean_h_dist = 0.0;
  std::size_t replications = 0;
  // log10(mean excess) and -log(-log(mean excess)); defined only for
  // 0 < mean < 1, emitted as empty CSV fields otherwise.
  std::optional<double> log10_err;
  std::optional<double> loglog_err;
};

inline void finalize_transforms(AggregateRecord& r) {
  if (r.mean_excess_error > 0.0 && r.mean_excess_error < 1.0) {
    r.log10_err = std::log10(r.mean_excess_error);
    r.loglog_err = -std::log(-std::log(r.mean_excess_error));
  }
}

/// Run one experiment: per replication r, seed = base_seed + r, stream
/// samples through the selected estimator, evaluate at the checkpoints,
/// then aggregate in replication order with pairwise summation.
inline std::vector<AggregateRecord> run_experiment(
    const ExperimentConfig& cfg,
    const std::function<void(std::size_t, const Snapshot&, const EvalReport&)>&
        snapshot_hook = nullptr) {
  cfg.validate();
  const MarginDistribution d(cfg.epsilon, cfg.flip_p);
  const KernelSpec k{KernelKind::Exponential, cfg.sigma, 1.0};
  const auto grid = quad_grid(d, cfg.grid_panels, cfg.grid_order);
  const HFunction g_lambda = solve_glambda(d, k, cfg.lambda, grid);
  const auto cps = cfg.effective_checkpoints();

  // reports[r][c]
  std::vector<std::vector<EvalReport>> reports(
      cfg.replications, std::vector<EvalReport>(cps.size()));

  auto worker_body = [&](std::size_t r) {
    std::mt19937_64 rng(cfg.base_seed + r);
    if (cfg.estimator == Estimator::Krr) {
      // independent fresh sample set per checkpoint size, nested draws
      // reuse the stream so smaller n is a prefix of larger n
      const auto samples = sample(d, rng, cps.back());
      for (std::size_t c = 0; c < cps.size(); ++c) {
        std::vector<LabeledSample> sub(samples.begin(),
                                       samples.begin() +
                                           static_cast<std::ptrdiff_t>(cps[c]));
        const auto fit = fit_krr(sub, k, cfg.lambda);
        reports[r][c] =
            evaluate(fit.model, d, g_lambda, grid, sub, cfg.resolution);
      }
      return;
    }
    SgdState st(k, cfg.lambda, cfg.schedule, nullptr,
                cfg.estimator != Estimator::Plain);
    const auto rec = run(st, d, rng, cfg.n_max, cps);
    for (std::size_t c = 0; c < cps.size(); ++c) {
      const Snapshot& snap = rec.snapshots[c];
      const HFunction* g = &snap.plain;
      if (cfg.estimator == Estimator::Averaged) g = &snap.averaged;
      if (cfg.estimator == Estimator::Tail && snap.n >= 2) g = &snap.tail;
      std::vector<LabeledSample> seen(
          rec.samples.begin(),
          rec.samples.begin() + static_cast<std::ptrdiff_t>(snap.n));
      reports[r][c] = evaluate(*g, d, g_lambda, grid, seen, cfg.resolution);
      if (snapshot_hook) snapshot_hook(r, snap, reports[r][c]);
    }
  };

  int jobs = cfg.jobs;
  if (jobs <= 0) {
    if (const char* env = std::getenv("MARGIN_SGD_JOBS")) jobs = std::atoi(env);
    if (jobs <= 0)
      jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;
  }
  if (snapshot_hook) jobs = 1;  // hooks see a deterministic serial order
  if (jobs == 1) {
    for (std::size_t r = 0; r < cfg.replications; ++r) worker_body(r);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t r = next.fetch_add(1); r < cfg.replications;
             r = next.fetch_add(1))
          worker_body(r);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<AggregateRecord> out(cps.size());
  std::vector<double> col(cfg.replications);
  for (std::size_t c = 0; c < cps.size(); ++c) {
    AggregateRecord& rec = out[c];
    rec.n = cps[c];
    rec.replications = cfg.replications;
    auto mean = [&](auto field) {
      for (std::size_t r = 0; r < cfg.replications; ++r)
        col[r] = reports[r][c].*field;
      return pairwise_sum(col) / static_cast<double>(cfg.replications);
    };
    rec.mean_excess_error = mean(&EvalReport::excess_risk_01);
    rec.mean_l2_loss = mean(&EvalReport::l2_loss_vs_glambda);
    rec.mean_train_error = mean(&EvalReport::train_error);
    rec.mean_train_loss = mean(&EvalReport::train_loss);
    rec.mean_h_dist = mean(&EvalReport::h_dist_vs_glambda);
    finalize_transforms(rec);
  }
  return out;
}

inline std::string to_csv(const std::vector<AggregateRecord>& records) {
  std::string s =
      "n,mean_excess_error,mean_l2_loss,mean_train_error,mean_train_loss,"
      "mean_h_dist,log10_err,loglog_err\n";
  for (const auto& r : records) {
    s += std::to_string(r.n);
    s += ',' + fmt_double(r.mean_excess_error);
    s += ',' + fmt_double(r.mean_l2_loss);
    s += ',' + fmt_double(r.mean_train_error);
    s += ',' + fmt_double(r.mean_train_loss);
    s += ',' + fmt_double(r.mean_h_dist);
    s += ',';
    if (r.log10_err) s += fmt_double(*r.log10_err);
    s += ',';
    if (r.loglog_err) s += fmt_double(*r.loglog_err);
    s += '\n';
  }
  return s;
}

struct SlopeFit {
  double slope;
  double intercept;
  double r2;
};

/// Ordinary least squares on transformed points.
inline SlopeFit fit_slope(const std::vector<double>& xs,
                          const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 3 || ys.size() != n)
    throw std::invalid_argument("fit_slope: need >= 3 points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: degenerate x");
  const double slope = sxy / sxx;
  const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {slope, my - slope * mx, r2};
}

/// Longest run of checkpoints with a defined log10 transform that ends at
/// the last defined checkpoint ("the line after a certain n").
inline SlopeFit fit_log10_suffix(const std::vector<AggregateRecord>& records) {
  std::size_t last = records.size();
  while (last > 0 && !records[last - 1].log10_err) --last;
  if (last == 0) throw std::invalid_argument("fit_log10_suffix: no defined points");
  std::size_t first = last;
  while (first > 0 && records[first - 1].log10_err) --first;
  std::vector<double> xs, ys;
  for (std::size_t i = first; i < last; ++i) {
    xs.push_back(static_cast<double>(records[i].n));
    ys.push_back(*records[i].log10_err);
  }
  return fit_slope(xs, ys);
}

}  // namespace msgd
