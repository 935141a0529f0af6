// Command-line driver: replication experiments, KRR diagnostics, bound
// curves, the concentration validator, and g_lambda dumps.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>

#include "msgd/bounds.hpp"
#include "msgd/config_io.hpp"
#include "msgd/experiment.hpp"

namespace {

using namespace msgd;

void add_common(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path,
                std::string& estimator_str) {
  cmd->add_option("--config", config_path, "config file (key=value or JSON)");
  cmd->add_option("--out", cfg.out_path, "output CSV path (default: stdout)");
  cmd->add_option("--jobs", cfg.jobs, "worker threads (env MARGIN_SGD_JOBS)");
  cmd->add_option("--seed", cfg.base_seed, "base seed; replication r uses seed+r");
  cmd->add_option("--epsilon", cfg.epsilon, "margin width");
  cmd->add_option("--flip-p", cfg.flip_p, "label flip probability");
  cmd->add_option("--sigma", cfg.sigma, "kernel scale");
  cmd->add_option("--gamma", cfg.schedule.gamma, "step size");
  cmd->add_option("--alpha", cfg.schedule.alpha,
                  "step decay exponent (0 = constant)");
  cmd->add_option("--lambda", cfg.lambda, "regularization");
  cmd->add_option("--n", cfg.n_max, "max sample count");
  cmd->add_option("--reps", cfg.replications, "replications");
  cmd->add_option("--estimator", estimator_str, "plain|averaged|tail|krr");
  cmd->add_option("--resolution", cfg.resolution,
                  "excess-risk scan points per interval");
  cmd->add_option("--checkpoints", cfg.checkpoints, "evaluation checkpoints");
}

ExperimentConfig finalize(CLI::App* cmd, ExperimentConfig cli_cfg,
                          const std::string& config_path,
                          const std::string& estimator_str) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config: " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
  }
  // CLI flags override file values.
  auto used = [&](const std::string& name) { return cmd->count(name) > 0; };
  if (used("--seed")) cfg.base_seed = cli_cfg.base_seed;
  if (used("--jobs")) cfg.jobs = cli_cfg.jobs;
  if (used("--out") || cfg.out_path.empty()) cfg.out_path = cli_cfg.out_path;
  if (used("--epsilon")) cfg.epsilon = cli_cfg.epsilon;
  if (used("--flip-p")) cfg.flip_p = cli_cfg.flip_p;
  if (used("--sigma")) cfg.sigma = cli_cfg.sigma;
  if (used("--gamma")) cfg.schedule.gamma = cli_cfg.schedule.gamma;
  if (used("--alpha")) {
    cfg.schedule.alpha = cli_cfg.schedule.alpha;
    cfg.schedule.kind = cfg.schedule.alpha == 0.0
                            ? StepSchedule::Kind::Constant
                            : StepSchedule::Kind::PowerDecay;
  }
  if (used("--lambda")) cfg.lambda = cli_cfg.lambda;
  if (used("--n")) cfg.n_max = cli_cfg.n_max;
  if (used("--reps")) cfg.replications = cli_cfg.replications;
  if (used("--estimator")) cfg.estimator = estimator_from(estimator_str);
  if (used("--resolution")) cfg.resolution = cli_cfg.resolution;
  if (used("--checkpoints")) cfg.checkpoints = cli_cfg.checkpoints;
  return cfg;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

int cmd_simulate(const ExperimentConfig& cfg) {
  const auto records = run_experiment(cfg);
  write_output(cfg.out_path, to_csv(records));
  return 0;
}

int cmd_glambda(const ExperimentConfig& cfg) {
  cfg.validate();
  const MarginDistribution d(cfg.epsilon, cfg.flip_p);
  const KernelSpec k{KernelKind::Exponential, cfg.sigma, 1.0};
  const auto grid = quad_grid(d, cfg.grid_panels, cfg.grid_order);
  const HFunction g_lambda = solve_glambda(d, k, cfg.lambda, grid);
  std::string csv = "x,g_star,g_lambda\n";
  for (int i = 0; i <= 2000; ++i) {
    const double x = i / 2000.0;
    csv += fmt_double(x) + ',' + fmt_double(d.bayes_regression(x)) + ',' +
           fmt_double(g_lambda.eval(x)) + '\n';
  }
  write_output(cfg.out_path, csv);
  return 0;
}

int cmd_krr(const ExperimentConfig& cfg) {
  cfg.validate();
  const MarginDistribution d(cfg.epsilon, cfg.flip_p);
  const KernelSpec k{KernelKind::Exponential, cfg.sigma, 1.0};
  const auto grid = quad_grid(d, cfg.grid_panels, cfg.grid_order);
  const HFunction g_lambda = solve_glambda(d, k, cfg.lambda, grid);
  std::string csv = "n,seed,lhs,rhs,u,v,error_equal_bayes\n";
  const auto cps = cfg.effective_checkpoints();
  for (std::size_t r = 0; r < cfg.replications; ++r) {
    const std::uint64_t seed = cfg.base_seed + r;
    std::mt19937_64 rng(seed);
    const auto samples = sample(d, rng, cps.back());
    for (std::size_t n : cps) {
      std::vector<LabeledSample> sub(samples.begin(),
                                     samples.begin() +
                                         static_cast<std::ptrdiff_t>(n));
      const auto fit = fit_krr(sub, k, cfg.lambda);
      const double u = u_n(sub, d, k, grid);
      const double v = v_hs(sub, k, d, grid);
      const auto gap = lemma2_gap(fit, g_lambda, u, v, cfg.lambda, k.bound);
      const int perfect =
          excess_risk_01(fit.model, d, cfg.resolution) == 0.0 ? 1 : 0;
      csv += std::to_string(n) + ',' + std::to_string(seed) + ',' +
             fmt_double(gap.lhs) + ',' + fmt_double(gap.rhs) + ',' +
             fmt_double(u) + ',' + fmt_double(v) + ',' +
             std::to_string(perfect) + '\n';
    }
  }
  write_output(cfg.out_path, csv);
  return 0;
}

int cmd_bounds(const ExperimentConfig& cfg) {
  cfg.validate();
  const MarginDistribution d(cfg.epsilon, cfg.flip_p);
  const KernelSpec k{KernelKind::Exponential, cfg.sigma, 1.0};
  const auto grid = quad_grid(d, cfg.grid_panels, cfg.grid_order);
  const HFunction g_lambda = solve_glambda(d, k, cfg.lambda, grid);
  BoundParams p = noise_constants(d, k, g_lambda, grid);
  p.lambda = cfg.lambda;
  p.gamma = cfg.schedule.gamma;
  p.alpha = cfg.schedule.alpha;
  p.eff_dim2 = effective_dim2(k, grid, cfg.lambda);
  p.h_norm_init = h_norm(g_lambda);  // g0 = 0

  nlohmann::json j;
  j["R"] = p.R;
  j["delta"] = p.delta;
  j["lambda"] = p.lambda;
  j["gamma"] = p.gamma;
  j["alpha"] = p.alpha;
  j["sup_inf_norm"] = p.sup_inf_norm;
  j["c_half"] = p.c_half;
  j["trC"] = p.trC;
  j["trSigma"] = p.trSigma;
  j["eff_dim2"] = p.eff_dim2;
  j["h_norm_init"] = p.h_norm_init;
  std::cerr << j.dump(2) << "\n";

  std::string csv =
      "n,thm3,thm3_applicable,thm4,thm4_applicable,thm5_krr,full_avg,"
      "full_avg_applicable\n";
  for (std::size_t n : cfg.effective_checkpoints()) {
    const auto b = thm_error_bounds(p, n);
    csv += std::to_string(n) + ',' + fmt_double(b.thm3.value) + ',' +
           std::to_string(b.thm3.applicable ? 1 : 0) + ',' +
           fmt_double(b.thm4.value) + ',' +
           std::to_string(b.thm4.applicable ? 1 : 0) + ',' +
           fmt_double(b.thm5_krr.value) + ',' + fmt_double(b.full_avg.value) +
           ',' + std::to_string(b.full_avg.applicable ? 1 : 0) + '\n';
  }
  write_output(cfg.out_path, csv);
  return 0;
}

int cmd_concentration(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(cfg.base_seed);
  std::vector<double> t_grid;
  const std::size_t n = cfg.n_max >= 2 ? cfg.n_max : 100;
  for (int i = 1; i <= 20; ++i) t_grid.push_back(2.0 * n * i / 100.0);
  const auto rep = mc_concentration_check(1.0, n, t_grid,
                                          std::max<std::size_t>(
                                              cfg.replications, 1000),
                                          rng);
  std::string csv = "t,empirical,wilson_lower,bound,ok\n";
  for (const auto& pt : rep.points)
    csv += fmt_double(pt.t) + ',' + fmt_double(pt.empirical) + ',' +
           fmt_double(pt.wilson_lower) + ',' + fmt_double(pt.bound) + ',' +
           (pt.ok ? "1" : "0") + '\n';
  write_output(cfg.out_path, csv);
  std::cerr << (rep.all_ok ? "concentration: all points within bound\n"
                           : "concentration: VIOLATION\n");
  return rep.all_ok ? 0 : 1;
}

int cmd_selftest() {
  const MarginDistribution d(0.05, 0.0);
  const KernelSpec k{KernelKind::Exponential, 1.0, 1.0};
  const auto grid = quad_grid(d, 20, 8);
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };
  std::vector<double> ones(grid.nodes.size(), 1.0);
  check("quadrature normalization", std::abs(grid.integrate(ones) - 1.0) < 1e-12);
  const HFunction gl = solve_glambda(d, k, 0.01, grid);
  check("g_lambda residual <= 1e-6",
        optimality_residual(gl, d, k, 0.01, grid, support_probe(d, 1001)) <= 1e-6);
  const auto mc = margin_delta(gl, d, 2001);
  // converged margin of g_lambda is 0.2653 at the default parameters: A5
  // holds with a margin constant of 0.265 delta rather than delta/2
  check("A5 margin positive and near its converged value",
        mc.sign_ok && mc.min_margin >= 0.25);
  std::mt19937_64 rng(7);
  SgdState st(k, 0.01, StepSchedule::constant(0.25));
  const auto rec = run(st, d, rng, 50, {50});
  check("sgd run produces snapshot", rec.snapshots.size() == 1);
  check("excess risk of g_lambda is 0", excess_risk_01(gl, d) == 0.0);
  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel least-squares SGD margin-classification simulator"};
  app.require_subcommand(1);

  struct Sub {
    CLI::App* cmd;
    ExperimentConfig cfg;
    std::string config_path;
    std::string estimator_str;
  };
  std::map<std::string, Sub> subs;
  for (const char* name :
       {"simulate", "krr", "bounds", "concentration", "glambda"}) {
    Sub& s = subs[name];  // stable address: options bind to these fields
    s.cmd = app.add_subcommand(name);
    add_common(s.cmd, s.cfg, s.config_path, s.estimator_str);
  }
  CLI::App* selftest = app.add_subcommand("selftest", "run quick invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (selftest->parsed()) return cmd_selftest();
    for (auto& [name, s] : subs) {
      if (!s.cmd->parsed()) continue;
      const ExperimentConfig cfg =
          finalize(s.cmd, s.cfg, s.config_path, s.estimator_str);
      if (name == "simulate") return cmd_simulate(cfg);
      if (name == "krr") return cmd_krr(cfg);
      if (name == "bounds") return cmd_bounds(cfg);
      if (name == "concentration") return cmd_concentration(cfg);
      if (name == "glambda") return cmd_glambda(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
