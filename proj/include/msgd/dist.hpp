#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace msgd {

struct LabeledSample {
  double x;
  int y;  // -1 or +1
};

/// Two-interval margin distribution on [0,1]: x uniform on
/// S+ = [0,(1-eps)/2] union S- = [(1+eps)/2,1], base label sign(+1 on S+,
/// -1 on S-) flipped independently with probability flip_p.
struct MarginDistribution {
  double epsilon;
  double flip_p;

  MarginDistribution(double eps, double p) : epsilon(eps), flip_p(p) {
    if (!(eps > 0.0 && eps < 1.0))
      throw std::invalid_argument("MarginDistribution: epsilon must be in (0,1)");
    if (!(p >= 0.0 && p < 0.5))
      throw std::invalid_argument("MarginDistribution: flip_p must be in [0,0.5)");
  }

  double s_plus_hi() const { return (1.0 - epsilon) / 2.0; }
  double s_minus_lo() const { return (1.0 + epsilon) / 2.0; }
  double delta() const { return 1.0 - 2.0 * flip_p; }

  bool in_support(double x) const {
    return (x >= 0.0 && x <= s_plus_hi()) || (x >= s_minus_lo() && x <= 1.0);
  }

  double density(double x) const {
    if (x < 0.0 || x > 1.0)
      throw std::invalid_argument("density: x outside [0,1]");
    return in_support(x) ? 1.0 / (1.0 - epsilon) : 0.0;
  }

  /// E[y|x]: +delta on S+, -delta on S-, 0 in the gap by convention.
  double bayes_regression(double x) const {
    if (x <= s_plus_hi() && x >= 0.0) return delta();
    if (x >= s_minus_lo() && x <= 1.0) return -delta();
    return 0.0;
  }

  double bayes_risk() const { return flip_p; }
};

// Uniform double in [0,1) from the top 53 bits of the generator output;
// keeps the sample stream independent of library distribution internals.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline LabeledSample sample_one(const MarginDistribution& d,
                                std::mt19937_64& rng) {
  const double half = (1.0 - d.epsilon) / 2.0;
  const bool in_plus = uniform01(rng) < 0.5;  // intervals have equal length
  const double u = uniform01(rng);
  LabeledSample s;
  if (in_plus) {
    s.x = u * half;
    s.y = +1;
  } else {
    s.x = d.s_minus_lo() + u * half;
    s.y = -1;
  }
  if (uniform01(rng) < d.flip_p) s.y = -s.y;
  return s;
}

inline std::vector<LabeledSample> sample(const MarginDistribution& d,
                                         std::mt19937_64& rng,
                                         std::size_t n) {
  std::vector<LabeledSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(d, rng));
  return out;
}

}  // namespace msgd
