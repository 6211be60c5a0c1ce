#pragma once

#include "mmx/sets.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>

namespace mmx {

using ValueFn = std::function<double(const Vec& x, const Vec& y)>;
// Gradient oracles write into a caller-owned buffer so solver loops do not allocate.
using GradFn = std::function<void(const Vec& x, const Vec& y, Vec& out)>;

// Closed forms an instance may provide. Every member is optional; an empty
// std::function means "not available" and the numeric fallback is used.
struct AnalyticOracles {
  // argmax_y f(x,y) - (r/2)|y|^2 over Y, for the requested r >= 0.
  std::function<Vec(double r, const Vec& x)> y_star;
  // max_y f(x,y) - (r/2)|y|^2 over Y; r = 0 gives Phi(x).
  std::function<double(double r, const Vec& x)> phi_tilde;
  // 2*ell*|prox_{Phi/(2 ell)}(x) - x| where a closed form applies, nullopt elsewhere.
  std::function<std::optional<double>(const Vec& x)> os_closed;
  // Box (lo, hi) guaranteed to contain prox_{Phi/(2 ell)}(x).
  std::function<std::pair<Vec, Vec>(const Vec& x)> prox_region;
  // min_x max_y f(x,y) - (r/2)|y|^2, nullopt when no closed form is known for this r.
  std::function<std::optional<double>(double r)> minmax_value;
  // Exact saddle of F~(., ., z), nullopt when the closed form does not apply.
  std::function<std::optional<std::pair<Vec, Vec>>(double r_x, double r_y, const Vec& z)> saddle;
};

struct MinimaxProblem {
  std::string name;
  Index dim_x = 1;
  Index dim_y = 1;
  double ell = 1.0;
  ProjectableSet set_x;
  ProjectableSet set_y;
  ValueFn f;
  GradFn grad_x;
  GradFn grad_y;
  AnalyticOracles analytic;

  void validate() const {
    require(ell > 0.0 && std::isfinite(ell), Errc::invalid_argument, "ell must be positive");
    require(f && grad_x && grad_y, Errc::invalid_argument, "value and gradient oracles are required");
    require(set_x.dim() == dim_x, Errc::dimension_mismatch, "set_x dimension differs from dim_x");
    require(set_y.dim() == dim_y, Errc::dimension_mismatch, "set_y dimension differs from dim_y");
    require(set_y.bounded(), Errc::invalid_argument, "dual set must be bounded");
    require(set_y.contains(Vec::Zero(dim_y)), Errc::invalid_argument, "dual set must contain the origin");
  }

  double diameter_y() const { return set_y.diameter(); }

  Vec gx(const Vec& x, const Vec& y) const {
    Vec g(dim_x);
    grad_x(x, y, g);
    return g;
  }
  Vec gy(const Vec& x, const Vec& y) const {
    Vec g(dim_y);
    grad_y(x, y, g);
    return g;
  }

  void check_dims(const Vec& x, const Vec& y) const {
    require(x.size() == dim_x, Errc::dimension_mismatch, "x has wrong dimension");
    require(y.size() == dim_y, Errc::dimension_mismatch, "y has wrong dimension");
  }
};

struct SurrogateParams {
  double r_x = 0.0;
  double r_y = 0.0;
};

// f~(x,y) = f(x,y) - (r_y/2)|y|^2
inline double perturbed_value(const MinimaxProblem& p, double r_y, const Vec& x, const Vec& y) {
  return p.f(x, y) - 0.5 * r_y * y.squaredNorm();
}

// F~(x,y,z) = f(x,y) + (r_x/2)|x-z|^2 - (r_y/2)|y|^2
inline double surrogate_value(const MinimaxProblem& p, const SurrogateParams& s, const Vec& x, const Vec& y,
                              const Vec& z) {
  double v = perturbed_value(p, s.r_y, x, y);
  if (s.r_x != 0.0) v += 0.5 * s.r_x * (x - z).squaredNorm();
  return v;
}

inline std::pair<Vec, Vec> surrogate_grads(const MinimaxProblem& p, const SurrogateParams& s, const Vec& x,
                                           const Vec& y, const Vec& z) {
  p.check_dims(x, y);
  require(s.r_x == 0.0 || z.size() == p.dim_x, Errc::dimension_mismatch, "z has wrong dimension");
  Vec gx = p.gx(x, y);
  Vec gy = p.gy(x, y);
  if (s.r_x != 0.0) gx += s.r_x * (x - z);
  if (s.r_y != 0.0) gy -= s.r_y * y;
  return {std::move(gx), std::move(gy)};
}

struct LipschitzSample {
  double max_ratio_x = 0.0;  // max |grad_x f(p) - grad_x f(p')| / (|x-x'| + |y-y'|)
  double max_ratio_y = 0.0;
  long pairs = 0;
};

// Draws pairs from `draw` (returning (x, y)) and records the largest gradient
// difference quotient for each block.
template <class Draw>
LipschitzSample sampled_lipschitz(const MinimaxProblem& p, Draw&& draw, long n_pairs) {
  LipschitzSample out;
  for (long k = 0; k < n_pairs; ++k) {
    auto [x1, y1] = draw();
    auto [x2, y2] = draw();
    const double d = (x1 - x2).norm() + (y1 - y2).norm();
    if (d == 0.0) continue;
    out.max_ratio_x = std::max(out.max_ratio_x, (p.gx(x1, y1) - p.gx(x2, y2)).norm() / d);
    out.max_ratio_y = std::max(out.max_ratio_y, (p.gy(x1, y1) - p.gy(x2, y2)).norm() / d);
    ++out.pairs;
  }
  return out;
}

// Largest violation of midpoint concavity in y; <= 0 means no violation was seen.
template <class Draw>
double sampled_concavity_violation(const MinimaxProblem& p, Draw&& draw, long n_pairs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (long k = 0; k < n_pairs; ++k) {
    auto [x, y1] = draw();
    auto [x_unused, y2] = draw();
    (void)x_unused;
    const Vec ym = 0.5 * (y1 + y2);
    worst = std::max(worst, 0.5 * (p.f(x, y1) + p.f(x, y2)) - p.f(x, ym));
  }
  return worst;
}

}  // namespace mmx
