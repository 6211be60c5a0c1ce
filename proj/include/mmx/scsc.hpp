#pragma once

#include "mmx/problem.hpp"

#include <string>

namespace mmx {

struct ScscResult {
  Vec x, y;
  double certificate = 0.0;  // upper bound on |x - x*|^2 + |y - y*|^2
  long iterations = 0;
  long evaluations = 0;      // saddle-operator evaluations, including the final certificate check
};

// Certified solve of min_x max_y F~(x, y, z) for fixed z by projected
// extragradient on G(x, y) = (grad_x F~, -grad_y F~).
inline ScscResult inner_scsc(const MinimaxProblem& p, const SurrogateParams& s, const Vec& z, double delta,
                             const Vec& x0, const Vec& y0, long max_iters = 10000000) {
  require(s.r_x > p.ell, Errc::not_strongly_convex, "inner_scsc needs r_x > ell");
  require(s.r_y > 0.0, Errc::not_strongly_convex, "inner_scsc needs r_y > 0");
  require(delta > 0.0, Errc::invalid_argument, "delta must be positive");
  p.check_dims(x0, y0);
  require(z.size() == p.dim_x, Errc::dimension_mismatch, "z has wrong dimension");

  const double mu = std::min(s.r_x - p.ell, s.r_y);
  const double lg = s.r_x + s.r_y + 2.0 * p.ell;
  const double eta = 1.0 / (2.0 * lg);
  const double kappa = (1.0 + eta * lg) / (eta * mu);

  ScscResult r;
  Vec x = p.set_x.project(x0), y = p.set_y.project(y0);
  Vec gx(p.dim_x), gy(p.dim_y), xh(p.dim_x), yh(p.dim_y);
  auto op = [&](const Vec& a, const Vec& b) {
    p.grad_x(a, b, gx);
    p.grad_y(a, b, gy);
    gx += s.r_x * (a - z);
    gy -= s.r_y * b;
    ++r.evaluations;
  };
  double best = std::numeric_limits<double>::infinity();
  for (long k = 0;; ++k) {
    op(x, y);
    require(gx.allFinite() && gy.allFinite(), Errc::non_finite, "saddle operator returned NaN");
    xh = x - eta * gx;
    p.set_x.project_into(xh, xh);
    yh = y + eta * gy;
    p.set_y.project_into(yh, yh);
    const double res = std::sqrt((x - xh).squaredNorm() + (y - yh).squaredNorm());
    const double cert = (kappa * res) * (kappa * res);
    best = std::min(best, cert);
    if (cert <= delta) {
      r.x = x;
      r.y = y;
      r.certificate = cert;
      r.iterations = k;
      return r;
    }
    if (k >= max_iters)
      throw Error(Errc::not_converged, "inner_scsc hit the iteration cap; best certificate " + std::to_string(best));
    op(xh, yh);
    x -= eta * gx;
    p.set_x.project_into(x, x);
    y += eta * gy;
    p.set_y.project_into(y, y);
  }
}

}  // namespace mmx
