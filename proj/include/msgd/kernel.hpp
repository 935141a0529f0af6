#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "msgd/util.hpp"

namespace msgd {

enum class KernelKind { Exponential };

/// A bounded positive-definite kernel on [0,1]. Only the exponential
/// (Abel) kernel K(x,x') = exp(-|x-x'|/sigma) is provided; K(x,x) = 1,
/// so the sup bound R is 1.
struct KernelSpec {
  KernelKind kind = KernelKind::Exponential;
  double scale = 1.0;
  double bound = 1.0;

  double eval(double x, double y) const {
    return std::exp(-std::abs(x - y) / scale);
  }

  friend bool operator==(const KernelSpec& a, const KernelSpec& b) {
    return a.kind == b.kind && a.scale == b.scale && a.bound == b.bound;
  }
};

inline Eigen::MatrixXd gram(const KernelSpec& k, std::span<const double> xs,
                            std::span<const double> ys) {
  if (xs.empty() || ys.empty())
    throw std::invalid_argument("gram: empty point list");
  Eigen::MatrixXd g(xs.size(), ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < ys.size(); ++j)
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          k.eval(xs[i], ys[j]);
  return g;
}

/// A finite kernel expansion sum_i coefs[i] * K(centers[i], .) plus an
/// optional scaled offset function. The offset is kept by reference so a
/// nonzero starting point costs O(1) per SGD step; it is inlined only when
/// a flattened expansion is required (inner products, norms).
struct HFunction {
  KernelSpec kernel;
  std::vector<double> centers;
  std::vector<double> coefs;
  std::shared_ptr<const HFunction> offset_fn;
  double offset_scale = 0.0;

  HFunction() = default;
  explicit HFunction(KernelSpec k) : kernel(k) {}
  HFunction(KernelSpec k, std::vector<double> c, std::vector<double> a)
      : kernel(k), centers(std::move(c)), coefs(std::move(a)) {
    if (centers.size() != coefs.size())
      throw std::invalid_argument("HFunction: centers/coefs length mismatch");
  }

  double eval(double x) const {
    std::vector<double> terms(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i)
      terms[i] = coefs[i] * kernel.eval(centers[i], x);
    double v = pairwise_sum(terms);
    if (offset_fn && offset_scale != 0.0) v += offset_scale * offset_fn->eval(x);
    return v;
  }

  double operator()(double x) const { return eval(x); }

  /// Inline offset functions recursively into a plain expansion.
  HFunction flattened() const {
    HFunction out(kernel);
    flatten_into(out, 1.0);
    return out;
  }

 private:
  void flatten_into(HFunction& out, double scale) const {
    for (std::size_t i = 0; i < centers.size(); ++i) {
      out.centers.push_back(centers[i]);
      out.coefs.push_back(scale * coefs[i]);
    }
    if (offset_fn && offset_scale != 0.0)
      offset_fn->flatten_into(out, scale * offset_scale);
  }
};

/// <f,g>_H = sum_ij a_i b_j K(x_i, z_j) over flattened expansions.
/// Row sums then a cascade over rows, in a fixed order.
inline double h_inner(const HFunction& f, const HFunction& g) {
  if (!(f.kernel == g.kernel))
    throw std::invalid_argument("h_inner: mismatched kernels");
  const HFunction ff = f.flattened();
  const HFunction gf = g.flattened();
  if (ff.centers.empty() || gf.centers.empty()) return 0.0;
  std::vector<double> rows(ff.centers.size());
  std::vector<double> terms(gf.centers.size());
  for (std::size_t i = 0; i < ff.centers.size(); ++i) {
    for (std::size_t j = 0; j < gf.centers.size(); ++j)
      terms[j] = gf.coefs[j] * f.kernel.eval(ff.centers[i], gf.centers[j]);
    rows[i] = ff.coefs[i] * pairwise_sum(terms);
  }
  return pairwise_sum(rows);
}

inline double h_norm(const HFunction& f) {
  const double q = h_inner(f, f);
  return std::sqrt(q < 0.0 ? 0.0 : q);
}

inline HFunction h_diff(const HFunction& f, const HFunction& g) {
  if (!(f.kernel == g.kernel))
    throw std::invalid_argument("h_diff: mismatched kernels");
  HFunction ff = f.flattened();
  const HFunction gf = g.flattened();
  for (std::size_t i = 0; i < gf.centers.size(); ++i) {
    ff.centers.push_back(gf.centers[i]);
    ff.coefs.push_back(-gf.coefs[i]);
  }
  return ff;
}

inline double h_dist(const HFunction& f, const HFunction& g) {
  return h_norm(h_diff(f, g));
}

}  // namespace msgd
