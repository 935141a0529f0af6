#pragma once

#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "msgd/experiment.hpp"

namespace msgd {

inline std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Plain: return "plain";
    case Estimator::Averaged: return "averaged";
    case Estimator::Tail: return "tail";
    case Estimator::Krr: return "krr";
  }
  return "tail";
}

inline Estimator estimator_from(const std::string& s) {
  if (s == "plain") return Estimator::Plain;
  if (s == "averaged") return Estimator::Averaged;
  if (s == "tail") return Estimator::Tail;
  if (s == "krr") return Estimator::Krr;
  throw std::invalid_argument("unknown estimator: " + s);
}

inline std::string schedule_name(StepSchedule::Kind k) {
  return k == StepSchedule::Kind::Constant ? "constant" : "power";
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["epsilon"] = c.epsilon;
  j["flip_p"] = c.flip_p;
  j["sigma"] = c.sigma;
  j["lambda"] = c.lambda;
  j["schedule"] = schedule_name(c.schedule.kind);
  j["gamma"] = c.schedule.gamma;
  j["alpha"] = c.schedule.alpha;
  j["n"] = c.n_max;
  j["checkpoints"] = c.checkpoints;
  j["reps"] = c.replications;
  j["seed"] = c.base_seed;
  j["grid_panels"] = c.grid_panels;
  j["grid_order"] = c.grid_order;
  j["resolution"] = c.resolution;
  j["estimator"] = estimator_name(c.estimator);
  j["jobs"] = c.jobs;
  return j;
}

inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
  if (j.contains("flip_p")) c.flip_p = j["flip_p"].get<double>();
  if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
  if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
  if (j.contains("schedule"))
    c.schedule.kind = j["schedule"].get<std::string>() == "constant"
                          ? StepSchedule::Kind::Constant
                          : StepSchedule::Kind::PowerDecay;
  if (j.contains("gamma")) c.schedule.gamma = j["gamma"].get<double>();
  if (j.contains("alpha")) c.schedule.alpha = j["alpha"].get<double>();
  if (j.contains("n")) c.n_max = j["n"].get<std::size_t>();
  if (j.contains("checkpoints"))
    c.checkpoints = j["checkpoints"].get<std::vector<std::size_t>>();
  if (j.contains("reps")) c.replications = j["reps"].get<std::size_t>();
  if (j.contains("seed")) c.base_seed = j["seed"].get<std::uint64_t>();
  if (j.contains("grid_panels")) c.grid_panels = j["grid_panels"].get<int>();
  if (j.contains("grid_order")) c.grid_order = j["grid_order"].get<int>();
  if (j.contains("resolution")) c.resolution = j["resolution"].get<int>();
  if (j.contains("estimator"))
    c.estimator = estimator_from(j["estimator"].get<std::string>());
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
}

/// Accepts either JSON (first non-space char '{') or flat key=value lines
/// ('#' comments allowed). Checkpoints in the flat form are
/// space-separated.
inline void apply_config_text(ExperimentConfig& c, const std::string& text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  if (pos != std::string::npos && text[pos] == '{') {
    apply_json(c, nlohmann::json::parse(text));
    return;
  }
  nlohmann::json j;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    if (key == "schedule" || key == "estimator") {
      j[key] = val;
    } else if (key == "checkpoints") {
      std::vector<std::size_t> cps;
      std::istringstream vs(val);
      std::size_t v;
      while (vs >> v) cps.push_back(v);
      j[key] = cps;
    } else if (key == "n" || key == "reps" || key == "seed" ||
               key == "grid_panels" || key == "grid_order" ||
               key == "resolution" || key == "jobs") {
      j[key] = std::stoull(val);
    } else {
      j[key] = std::stod(val);
    }
  }
  apply_json(c, j);
}

inline std::string config_to_flat(const ExperimentConfig& c) {
  std::string s;
  s += "epsilon=" + fmt_double(c.epsilon) + "\n";
  s += "flip_p=" + fmt_double(c.flip_p) + "\n";
  s += "sigma=" + fmt_double(c.sigma) + "\n";
  s += "lambda=" + fmt_double(c.lambda) + "\n";
  s += "schedule=" + schedule_name(c.schedule.kind) + "\n";
  s += "gamma=" + fmt_double(c.schedule.gamma) + "\n";
  s += "alpha=" + fmt_double(c.schedule.alpha) + "\n";
  s += "n=" + std::to_string(c.n_max) + "\n";
  if (!c.checkpoints.empty()) {
    s += "checkpoints=";
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i)
      s += (i ? " " : "") + std::to_string(c.checkpoints[i]);
    s += "\n";
  }
  s += "reps=" + std::to_string(c.replications) + "\n";
  s += "seed=" + std::to_string(c.base_seed) + "\n";
  s += "grid_panels=" + std::to_string(c.grid_panels) + "\n";
  s += "grid_order=" + std::to_string(c.grid_order) + "\n";
  s += "resolution=" + std::to_string(c.resolution) + "\n";
  s += "estimator=" + estimator_name(c.estimator) + "\n";
  s += "jobs=" + std::to_string(c.jobs) + "\n";
  return s;
}

}  // namespace msgd
