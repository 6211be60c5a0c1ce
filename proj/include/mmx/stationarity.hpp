#pragma once

#include "mmx/config.hpp"
#include "mmx/scsc.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mmx {

struct OracleResult {
  Vec point;                     // primary optimizer
  Vec point2;                    // secondary point (y of a saddle, or y~+)
  double value = 0.0;
  double certified_error = 0.0;  // bound on |point - true optimizer|
  double certified_error2 = 0.0; // bound on |point2 - true point2|
  double value_error = 0.0;      // bound on |value - true value|
  long oracle_calls = 0;
  std::string method;
};

struct Min1d {
  double x = 0.0;
  double value = 0.0;
  double radius = 0.0;       // |x - argmin| <= radius when the objective is convex near the minimum
  double value_error = 0.0;
  long evals = 0;
};

// Global 1-D minimization on [lo, hi]: exhaustive grid, then bisection on the
// sign of the (one-sided) derivative inside the best grid cell.
template <class F, class G>
Min1d minimize_1d(F&& fn, G&& deriv, double lo, double hi, int grid = 2001) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, Errc::invalid_argument, "bad 1-D search interval");
  Min1d r;
  if (lo == hi) {
    r.x = lo;
    r.value = fn(lo);
    r.evals = 1;
    return r;
  }
  const double h = (hi - lo) / (grid - 1);
  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double u = i == grid - 1 ? hi : lo + h * i;
    const double v = fn(u);
    ++r.evals;
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  double a = best == 0 ? lo : lo + h * (best - 1);
  double b = best == grid - 1 ? hi : lo + h * (best + 1);
  double ga = deriv(a), gb = deriv(b);
  r.evals += 2;
  if (a == lo && ga >= 0.0) {
    r.x = lo;
    r.value = fn(lo);
    r.value_error = 0.0;
    return r;
  }
  if (b == hi && gb <= 0.0) {
    r.x = hi;
    r.value = fn(hi);
    return r;
  }
  if (ga >= 0.0) b = a;
  else if (gb <= 0.0) a = b;
  while (b > a) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double gm = deriv(m);
    ++r.evals;
    if (gm < 0.0) {
      a = m;
      ga = gm;
    } else if (gm > 0.0) {
      b = m;
      gb = gm;
    } else {
      a = b = m;
    }
  }
  r.x = 0.5 * (a + b);
  r.value = fn(r.x);
  r.radius = 0.5 * (b - a) + 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(r.x));
  r.value_error = std::max(std::abs(ga), std::abs(gb)) * 2.0 * r.radius;
  return r;
}

inline OracleResult inner_max(const MinimaxProblem& p, double r_y, const Vec& x, double tol) {
  require(x.size() == p.dim_x, Errc::dimension_mismatch, "x has wrong dimension");
  OracleResult r;
  if (p.analytic.y_star) {
    r.point = p.analytic.y_star(r_y, x);
    r.value = perturbed_value(p, r_y, x, r.point);
    r.oracle_calls = 1;
    r.method = "analytic";
    return r;
  }
  require(r_y > 0.0, Errc::oracle_unavailable, "merely concave dual; oracle unavailable");
  const double eta = 1.0 / (p.ell + r_y);
  const double kappa = (1.0 + eta * (p.ell + r_y)) / (eta * r_y);
  Vec y = p.set_y.project(Vec::Zero(p.dim_y));
  Vec g(p.dim_y), yn(p.dim_y);
  for (long k = 0; k < 10000000; ++k) {
    p.grad_y(x, y, g);
    g -= r_y * y;
    ++r.oracle_calls;
    yn = y + eta * g;
    p.set_y.project_into(yn, yn);
    const double cert = kappa * (y - yn).norm();
    if (cert <= tol) {
      r.point = y;
      r.value = perturbed_value(p, r_y, x, y);
      r.certified_error = cert;
      r.value_error = g.norm() * cert;
      r.method = "projected-ascent";
      return r;
    }
    y.swap(yn);
  }
  throw Error(Errc::not_converged, "inner_max did not certify");
}

namespace detail {

inline std::pair<double, double> interval_of(const ProjectableSet& s) {
  const auto& v = s.variant();
  if (auto* i = std::get_if<Interval>(&v)) return {i->lo, i->hi};
  if (auto* b = std::get_if<Box>(&v)) return {b->lower[0], b->upper[0]};
  if (auto* b = std::get_if<Ball>(&v)) return {b->center[0] - b->radius, b->center[0] + b->radius};
  const double inf = std::numeric_limits<double>::infinity();
  return {-inf, inf};
}

}  // namespace detail

inline OracleResult prox_min(const MinimaxProblem& p, const SurrogateParams& s, const Vec& y, const Vec& z,
                             double tol, std::optional<double> alpha = std::nullopt) {
  require(s.r_x > p.ell, Errc::not_strongly_convex, "prox_min needs r_x > ell");
  require(y.size() == p.dim_y && z.size() == p.dim_x, Errc::dimension_mismatch, "prox_min arguments have wrong size");
  OracleResult r;
  const double mu = s.r_x - p.ell;
  Vec x = p.set_x.project(z);
  Vec g(p.dim_x);
  auto grad = [&](const Vec& u, Vec& out) {
    p.grad_x(u, y, out);
    out += s.r_x * (u - z);
  };
  if (p.dim_x == 1) {
    grad(x, g);
    const double rad = 2.0 * std::abs(g[0]) / mu + 1e-12 * (1.0 + std::abs(x[0]));
    auto [xlo, xhi] = detail::interval_of(p.set_x);
    const double lo = std::max(xlo, x[0] - rad), hi = std::min(xhi, x[0] + rad);
    Vec u(1), gu(1);
    auto fn = [&](double t) {
      u[0] = t;
      return surrogate_value(p, s, u, y, z);
    };
    auto dfn = [&](double t) {
      u[0] = t;
      grad(u, gu);
      return gu[0];
    };
    const Min1d m = minimize_1d(fn, dfn, lo, hi);
    r.point = vec1(m.x);
    r.value = m.value;
    r.certified_error = m.radius;
    r.value_error = m.value_error;
    r.oracle_calls = m.evals;
    r.method = "grid-bisection";
  } else {
    const double L = s.r_x + p.ell;
    const double eta = 1.0 / L;
    const double kappa = (1.0 + eta * L) / (eta * mu);
    Vec xn(p.dim_x);
    bool done = false;
    for (long k = 0; k < 10000000; ++k) {
      grad(x, g);
      ++r.oracle_calls;
      xn = x - eta * g;
      p.set_x.project_into(xn, xn);
      const double cert = kappa * (x - xn).norm();
      if (cert <= tol) {
        r.point = x;
        r.certified_error = cert;
        r.value_error = g.norm() * cert;
        done = true;
        break;
      }
      x.swap(xn);
    }
    require(done, Errc::not_converged, "prox_min did not certify");
    r.value = surrogate_value(p, s, r.point, y, z);
    r.method = "projected-gradient";
  }
  if (alpha) {
    Vec gy(p.dim_y);
    p.grad_y(r.point, y, gy);
    gy -= s.r_y * y;
    Vec yp = y + *alpha * gy;
    p.set_y.project_into(yp, yp);
    r.point2 = yp;
    r.certified_error2 = *alpha * p.ell * r.certified_error;
  }
  return r;
}

namespace detail {

inline OracleResult finish_saddle(const MinimaxProblem& p, const SurrogateParams& s, const Vec& z, Vec x, Vec y,
                                  double dist, std::string method, long calls) {
  OracleResult r;
  r.value = surrogate_value(p, s, x, y, z);
  Vec gx = p.gx(x, y) + s.r_x * (x - z);
  Vec gy = p.gy(x, y) - s.r_y * y;
  const double lg = s.r_x + s.r_y + 2.0 * p.ell;
  r.value_error = (std::sqrt(gx.squaredNorm() + gy.squaredNorm()) + lg * dist) * dist;
  r.point = std::move(x);
  r.point2 = std::move(y);
  r.certified_error = dist;
  r.certified_error2 = dist;
  r.method = std::move(method);
  r.oracle_calls = calls;
  return r;
}

// p~(z) = min_x [Phi~(x) + (r_x/2)(x - z)^2] in one dimension.
inline OracleResult envelope_1d(const MinimaxProblem& p, const SurrogateParams& s, const Vec& z) {
  require(p.dim_x == 1 && p.analytic.phi_tilde && p.analytic.y_star, Errc::oracle_unavailable,
          "one-dimensional envelope needs analytic Phi~ and y*");
  const double mu = s.r_x - p.ell;
  Vec u(1), gu(1);
  auto fn = [&](double t) {
    u[0] = t;
    return p.analytic.phi_tilde(s.r_y, u) + 0.5 * s.r_x * (t - z[0]) * (t - z[0]);
  };
  auto dfn = [&](double t) {
    u[0] = t;
    p.grad_x(u, p.analytic.y_star(s.r_y, u), gu);
    return gu[0] + s.r_x * (t - z[0]);
  };
  const double z0 = p.set_x.project(z)[0];
  const double rad = 2.0 * std::abs(dfn(z0)) / mu + 1e-12 * (1.0 + std::abs(z0));
  auto [xlo, xhi] = interval_of(p.set_x);
  const Min1d m = minimize_1d(fn, dfn, std::max(xlo, z0 - rad), std::min(xhi, z0 + rad));
  OracleResult r;
  r.point = vec1(m.x);
  r.point2 = p.analytic.y_star(s.r_y, r.point);
  r.value = m.value;
  r.certified_error = m.radius;
  r.value_error = m.value_error;
  r.oracle_calls = m.evals;
  r.method = "envelope-1d";
  return r;
}

}  // namespace detail

// Saddle of F~(., ., z): closed form when the instance has one, certified
// extragradient when r_y > 0, one-dimensional envelope minimization otherwise.
inline OracleResult saddle_solve(const MinimaxProblem& p, const SurrogateParams& s, const Vec& z, double delta,
                                 std::optional<std::pair<Vec, Vec>> warm = std::nullopt) {
  require(s.r_x > p.ell, Errc::not_strongly_convex, "saddle_solve needs r_x > ell");
  require(z.size() == p.dim_x, Errc::dimension_mismatch, "z has wrong dimension");
  if (p.analytic.saddle) {
    if (auto sd = p.analytic.saddle(s.r_x, s.r_y, z))
      return detail::finish_saddle(p, s, z, sd->first, sd->second, 0.0, "analytic", 1);
  }
  if (s.r_y > 0.0) {
    const Vec x0 = warm ? warm->first : p.set_x.project(z);
    const Vec y0 = warm ? warm->second : p.set_y.project(Vec::Zero(p.dim_y));
    const ScscResult sc = inner_scsc(p, s, z, delta, x0, y0);
    return detail::finish_saddle(p, s, z, sc.x, sc.y, std::sqrt(sc.certificate), "extragradient", sc.evaluations);
  }
  return detail::envelope_1d(p, s, z);
}

// p~(z) to high accuracy, choosing the cheapest certified route.
inline OracleResult ptilde(const MinimaxProblem& p, const SurrogateParams& s, const Vec& z, double delta = 1e-22) {
  if (p.analytic.saddle) {
    if (auto sd = p.analytic.saddle(s.r_x, s.r_y, z))
      return detail::finish_saddle(p, s, z, sd->first, sd->second, 0.0, "analytic", 1);
  }
  if (p.dim_x == 1 && p.analytic.phi_tilde && p.analytic.y_star) return detail::envelope_1d(p, s, z);
  return saddle_solve(p, s, z, delta);
}

struct GsResidual {
  double primal = 0.0;
  double dual = 0.0;
  double gs() const { return std::max(primal, dual); }
};

inline GsResidual gs_residual(const MinimaxProblem& p, const Vec& x, const Vec& y) {
  p.check_dims(x, y);
  GsResidual r;
  r.primal = p.set_x.normal_cone_residual(x, p.gx(x, y));
  r.dual = p.set_y.normal_cone_residual(y, -p.gy(x, y));
  return r;
}

struct OsResult {
  double value = 0.0;
  double slack = 0.0;  // |value - true value| <= slack
  Vec prox;            // empty when the closed form bypasses the prox point
  std::string method;
};

namespace detail {

inline std::pair<Vec, Vec> clip_region(const ProjectableSet& set, std::pair<Vec, Vec> reg) {
  const auto& v = set.variant();
  if (auto* b = std::get_if<Box>(&v)) {
    reg.first = reg.first.cwiseMax(b->lower);
    reg.second = reg.second.cwiseMin(b->upper);
  } else if (auto* i = std::get_if<Interval>(&v)) {
    reg.first[0] = std::max(reg.first[0], i->lo);
    reg.second[0] = std::min(reg.second[0], i->hi);
  }
  return reg;
}

// Grid + compass search for a 2-D box; returns (argmin, final step).
template <class F>
std::pair<Vec, double> minimize_2d(F&& fn, const Vec& lo, const Vec& hi, int grid = 401) {
  Vec best(2), u(2);
  double fb = std::numeric_limits<double>::infinity();
  const Vec h = (hi - lo) / (grid - 1);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      u << lo[0] + h[0] * i, lo[1] + h[1] * j;
      const double v = fn(u);
      if (v < fb) {
        fb = v;
        best = u;
      }
    }
  double step = std::max(h[0], h[1]);
  const double floor_step = 1e-12 * (1.0 + best.norm());
  while (step > floor_step) {
    bool moved = false;
    for (int d = 0; d < 4; ++d) {
      u = best;
      u[d / 2] += (d % 2 ? -step : step);
      u = u.cwiseMax(lo).cwiseMin(hi);
      const double v = fn(u);
      if (v < fb) {
        fb = v;
        best = u;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return {best, step};
}

}  // namespace detail

// 2 ell |prox_{Phi/(2 ell)}(x) - x|.
inline OsResult os_residual(const MinimaxProblem& p, const Vec& x, double tol = 1e-10, bool allow_closed = true) {
  require(x.size() == p.dim_x, Errc::dimension_mismatch, "x has wrong dimension");
  (void)tol;
  OsResult r;
  if (allow_closed && p.analytic.os_closed) {
    if (auto v = p.analytic.os_closed(x)) {
      r.value = *v;
      r.method = "analytic";
      return r;
    }
  }
  require(p.analytic.phi_tilde && p.analytic.prox_region, Errc::oracle_unavailable,
          "no Moreau oracle and no bounded prox search region for this instance");
  require(p.dim_x <= 2, Errc::oracle_unavailable, "numeric Moreau prox supported only for dim_x <= 2");
  const double l = p.ell;
  const auto reg = detail::clip_region(p.set_x, p.analytic.prox_region(x));
  if (p.dim_x == 1) {
    Vec u(1), gu(1);
    auto fn = [&](double t) {
      u[0] = t;
      return p.analytic.phi_tilde(0.0, u) + l * (t - x[0]) * (t - x[0]);
    };
    auto dfn = [&](double t) {
      u[0] = t;
      p.grad_x(u, p.analytic.y_star ? p.analytic.y_star(0.0, u) : Vec::Zero(p.dim_y), gu);
      return gu[0] + 2.0 * l * (t - x[0]);
    };
    if (!p.analytic.y_star) {
      // Without y* use Brent on the value alone and verify the bracket afterwards.
      const auto br = boost::math::tools::brent_find_minima(fn, reg.first[0], reg.second[0],
                                                            std::numeric_limits<double>::digits / 2);
      double s = 1e-9 * (1.0 + std::abs(br.first));
      while (!(fn(br.first - s) >= br.second && fn(br.first + s) >= br.second)) s *= 4.0;
      r.prox = vec1(br.first);
      r.value = 2.0 * l * std::abs(br.first - x[0]);
      r.slack = 2.0 * l * s;
      r.method = "numeric-brent";
      return r;
    }
    const Min1d m = minimize_1d(fn, dfn, reg.first[0], reg.second[0], 4001);
    r.prox = vec1(m.x);
    r.value = 2.0 * l * std::abs(m.x - x[0]);
    r.slack = 2.0 * l * m.radius;
    r.method = "numeric-1d";
    return r;
  }
  auto fn = [&](const Vec& u) { return p.analytic.phi_tilde(0.0, u) + l * (u - x).squaredNorm(); };
  auto [u, step] = detail::minimize_2d(fn, reg.first, reg.second);
  r.prox = u;
  r.value = 2.0 * l * (u - x).norm();
  r.slack = 2.0 * l * std::sqrt(2.0) * step;
  r.method = "numeric-2d";
  return r;
}

struct StationarityReport {
  double gs_primal = 0.0;
  double gs_dual = 0.0;
  double gs = 0.0;
  double os = std::numeric_limits<double>::quiet_NaN();
  double os_certified_slack = std::numeric_limits<double>::quiet_NaN();
};

inline StationarityReport stationarity_report(const MinimaxProblem& p, const Vec& x, const Vec& y, bool with_os) {
  StationarityReport r;
  const GsResidual g = gs_residual(p, x, y);
  r.gs_primal = g.primal;
  r.gs_dual = g.dual;
  r.gs = g.gs();
  if (with_os) {
    const OsResult o = os_residual(p, x);
    r.os = o.value;
    r.os_certified_slack = o.slack;
  }
  return r;
}

enum class LyapunovKind { Psi1, Psi2, PTilde };

inline std::string to_string(LyapunovKind k) {
  switch (k) {
    case LyapunovKind::Psi1: return "psi1";
    case LyapunovKind::Psi2: return "psi2";
    case LyapunovKind::PTilde: return "ptilde";
  }
  return "?";
}

struct LyapunovValue {
  double value = 0.0;
  double error = 0.0;
};

inline constexpr double kOracleTol = 1e-13;

// Psi1 = 2 Phi~(x) - f~(x, y); Psi2 = F~(x, y, z) - 2 d~(y, z) + 2 p~(z); p~(z).
inline LyapunovValue lyapunov(const MinimaxProblem& p, const SurrogateParams& s, LyapunovKind kind, const Vec& x,
                              const Vec& y, const Vec& z, double tol = kOracleTol) {
  LyapunovValue v;
  switch (kind) {
    case LyapunovKind::Psi1: {
      const OracleResult m = inner_max(p, s.r_y, x, tol);
      v.value = 2.0 * m.value - perturbed_value(p, s.r_y, x, y);
      v.error = 2.0 * m.value_error;
      return v;
    }
    case LyapunovKind::Psi2: {
      const OracleResult d = prox_min(p, s, y, z, tol);
      const OracleResult pt = ptilde(p, s, z);
      v.value = surrogate_value(p, s, x, y, z) - 2.0 * d.value + 2.0 * pt.value;
      v.error = 2.0 * d.value_error + 2.0 * pt.value_error;
      return v;
    }
    case LyapunovKind::PTilde: {
      const OracleResult pt = ptilde(p, s, z);
      v.value = pt.value;
      v.error = pt.value_error;
      return v;
    }
  }
  throw Error(Errc::invalid_argument, "unknown Lyapunov kind");
}

// min_x max_y f~(x, y), closed form when available, otherwise a nested search
// over a bounded X of dimension <= 2.
inline OracleResult minmax_value(const MinimaxProblem& p, double r_y) {
  OracleResult r;
  if (p.analytic.minmax_value) {
    if (auto v = p.analytic.minmax_value(r_y)) {
      r.value = *v;
      r.method = "analytic";
      return r;
    }
  }
  require(p.set_x.bounded(), Errc::oracle_unavailable, "unbounded minmax estimate: X is unbounded");
  require(p.dim_x <= 2, Errc::oracle_unavailable, "numeric minmax supported only for dim_x <= 2");
  const auto& var = p.set_x.variant();
  Vec lo(p.dim_x), hi(p.dim_x);
  if (auto* b = std::get_if<Box>(&var)) {
    lo = b->lower;
    hi = b->upper;
  } else if (auto* i = std::get_if<Interval>(&var)) {
    lo[0] = i->lo;
    hi[0] = i->hi;
  } else {
    throw Error(Errc::oracle_unavailable, "numeric minmax needs a box or interval X");
  }
  double err = 0.0;
  auto phi = [&](const Vec& u) {
    const OracleResult m = inner_max(p, r_y, u, 1e-12);
    err = std::max(err, m.value_error);
    return m.value;
  };
  if (p.dim_x == 1) {
    Vec u(1);
    auto fn = [&](double t) {
      u[0] = t;
      return phi(u);
    };
    const auto br = boost::math::tools::brent_find_minima(fn, lo[0], hi[0], std::numeric_limits<double>::digits / 2);
    // Brent is local; compare against a grid.
    double best = br.second, bx = br.first;
    for (int i = 0; i <= 4000; ++i) {
      const double t = lo[0] + (hi[0] - lo[0]) * i / 4000.0;
      const double v = fn(t);
      if (v < best) {
        best = v;
        bx = t;
      }
    }
    r.point = vec1(bx);
    r.value = best;
  } else {
    auto [u, step] = detail::minimize_2d(phi, lo, hi, 201);
    (void)step;
    r.point = u;
    r.value = phi(u);
  }
  r.value_error = err;
  r.method = "numeric";
  return r;
}

enum class GapKind { DeltaPsi1, DeltaPsi2, DeltaPTilde };

inline std::string to_string(GapKind k) {
  switch (k) {
    case GapKind::DeltaPsi1: return "DeltaPsi1";
    case GapKind::DeltaPsi2: return "DeltaPsi2";
    case GapKind::DeltaPTilde: return "DeltaPTilde";
  }
  return "?";
}

struct InitialGapReport {
  GapKind kind = GapKind::DeltaPsi1;
  double value = 0.0;
  std::vector<std::pair<std::string, double>> components;
  std::string method;
};

inline InitialGapReport initial_gap(const MinimaxProblem& p, const SolverConfig& cfg, GapKind kind,
                                    const IterateState& s0) {
  const SurrogateParams sp = cfg.surrogate();
  const OracleResult mm = minmax_value(p, cfg.r_y);
  InitialGapReport g;
  g.kind = kind;
  g.method = mm.method;
  g.components.emplace_back("minmax", mm.value);
  switch (kind) {
    case GapKind::DeltaPsi1: {
      const double psi1 = lyapunov(p, sp, LyapunovKind::Psi1, s0.x, s0.y, s0.z).value;
      const OracleResult ys = inner_max(p, cfg.r_y, s0.x, kOracleTol);
      const double dual = 4.0 * p.ell * p.ell * cfg.c * (ys.point - s0.y).squaredNorm();
      g.components.emplace_back("psi1", psi1);
      g.components.emplace_back("dual_gap", dual);
      g.value = psi1 + dual - mm.value;
      break;
    }
    case GapKind::DeltaPsi2: {
      const OracleResult d = prox_min(p, sp, s0.y, s0.z, kOracleTol);
      const OracleResult pt = ptilde(p, sp, s0.z);
      const double F = surrogate_value(p, sp, s0.x, s0.y, s0.z);
      g.components.emplace_back("F", F);
      g.components.emplace_back("d", d.value);
      g.components.emplace_back("p", pt.value);
      g.value = F - 2.0 * d.value + 2.0 * pt.value - mm.value;
      break;
    }
    case GapKind::DeltaPTilde: {
      const OracleResult pt = ptilde(p, sp, s0.z);
      g.components.emplace_back("p", pt.value);
      g.value = pt.value - mm.value;
      break;
    }
  }
  return g;
}

enum class AuditKind { DualErrPGDA, DualErrNCSC, GsToOs, Psi1Descent, Psi2Descent, Psi2DescentCoupled, PDescent };

inline std::string to_string(AuditKind k) {
  switch (k) {
    case AuditKind::DualErrPGDA: return "DualErrPGDA";
    case AuditKind::DualErrNCSC: return "DualErrNCSC";
    case AuditKind::GsToOs: return "GsToOs";
    case AuditKind::Psi1Descent: return "Psi1Descent";
    case AuditKind::Psi2Descent: return "Psi2Descent";
    case AuditKind::Psi2DescentCoupled: return "Psi2DescentCoupled";
    case AuditKind::PDescent: return "PDescent";
  }
  return "?";
}

inline AuditKind parse_audit_kind(const std::string& s) {
  for (AuditKind k : {AuditKind::DualErrPGDA, AuditKind::DualErrNCSC, AuditKind::GsToOs, AuditKind::Psi1Descent,
                      AuditKind::Psi2Descent, AuditKind::Psi2DescentCoupled, AuditKind::PDescent})
    if (to_string(k) == s) return k;
  throw Error(Errc::config, "unknown audit kind '" + s + "'");
}

// Consecutive iterates around step t. Which fields are needed depends on the kind.
struct AuditContext {
  const MinimaxProblem* problem = nullptr;
  SolverConfig cfg;
  std::optional<Vec> x_prev, y_prev;  // t-1
  std::optional<Vec> x, y, z;         // t
  std::optional<Vec> x_next, y_next, z_next;  // t+1
};

struct AuditResult {
  AuditKind kind = AuditKind::GsToOs;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;         // rhs - lhs
  double scale = 1.0;         // magnitude the relative tolerance refers to
  double oracle_error = 0.0;  // certified oracle error folded into the comparison

  bool holds(double rel_tol) const { return slack >= -rel_tol * scale - oracle_error; }
};

namespace detail {
inline const Vec& field(const std::optional<Vec>& v, const char* name) {
  if (!v) throw Error(Errc::missing_field, std::string("audit context lacks ") + name);
  return *v;
}
// Error of k*|u|^2 when u is known to within e.
inline double sq_err(double k, double norm_u, double e) { return std::abs(k) * (2.0 * norm_u * e + e * e); }
}  // namespace detail

inline AuditResult bound_audit(AuditKind kind, const AuditContext& c) {
  require(c.problem != nullptr, Errc::missing_field, "audit context lacks the problem");
  const MinimaxProblem& p = *c.problem;
  const SolverConfig& k = c.cfg;
  const SurrogateParams sp = k.surrogate();
  const double l = p.ell;
  using detail::field;
  AuditResult a;
  a.kind = kind;
  switch (kind) {
    case AuditKind::DualErrPGDA: {
      const Vec& x = field(c.x, "x"), &y = field(c.y, "y"), &yp = field(c.y_prev, "y_prev");
      const OracleResult m = inner_max(p, k.r_y, x, kOracleTol);
      a.lhs = (m.point - y).norm();
      a.rhs = (1.0 + k.alpha * (l + k.r_y)) / (k.alpha * k.r_y) * (y - yp).norm();
      a.oracle_error = m.certified_error;
      break;
    }
    case AuditKind::DualErrNCSC: {
      const Vec& y = field(c.y, "y"), &z = field(c.z, "z");
      const OracleResult xt = prox_min(p, sp, y, z, kOracleTol, k.alpha);
      const Vec& yplus = xt.point2;
      const OracleResult xt2 = prox_min(p, sp, yplus, z, kOracleTol);
      const OracleResult sd = saddle_solve(p, sp, z, 1e-22);
      a.lhs = (sd.point - xt2.point).norm();
      const double w = k.omega();
      a.rhs = w * (y - yplus).norm();
      // x~(., z) is (l/(r_x - l))-Lipschitz in y.
      a.oracle_error = sd.certified_error + xt2.certified_error + (l / (k.r_x - l)) * xt.certified_error2 +
                       w * xt.certified_error2;
      break;
    }
    case AuditKind::GsToOs: {
      const Vec& x = field(c.x, "x"), &y = field(c.y, "y");
      const GsResidual g = gs_residual(p, x, y);
      const OsResult o = os_residual(p, x);
      const double d = o.value / (2.0 * l);
      a.lhs = d * d;
      a.rhs = (2.0 * p.diameter_y() / l) * g.dual + g.primal * g.primal / (l * l);
      a.oracle_error = detail::sq_err(1.0, d, o.slack / (2.0 * l));
      break;
    }
    case AuditKind::Psi1Descent: {
      const Vec &x = field(c.x, "x"), &y = field(c.y, "y"), &yp = field(c.y_prev, "y_prev");
      const Vec &xn = field(c.x_next, "x_next"), &yn = field(c.y_next, "y_next");
      const auto v0 = lyapunov(p, sp, LyapunovKind::Psi1, x, y, Vec());
      const auto v1 = lyapunov(p, sp, LyapunovKind::Psi1, xn, yn, Vec());
      a.lhs = v1.value - v0.value;
      a.rhs = (y - yp).squaredNorm() / (4.0 * k.alpha) - (yn - y).squaredNorm() / (2.0 * k.alpha) -
              7.0 / (64.0 * k.c) * (xn - x).squaredNorm();
      a.scale = 1.0 + std::abs(v0.value);
      a.oracle_error = v0.error + v1.error;
      break;
    }
    case AuditKind::Psi2Descent:
    case AuditKind::Psi2DescentCoupled: {
      const Vec &x = field(c.x, "x"), &y = field(c.y, "y"), &z = field(c.z, "z");
      const Vec &xn = field(c.x_next, "x_next"), &yn = field(c.y_next, "y_next"), &zn = field(c.z_next, "z_next");
      const auto v0 = lyapunov(p, sp, LyapunovKind::Psi2, x, y, z);
      const auto v1 = lyapunov(p, sp, LyapunovKind::Psi2, xn, yn, zn);
      const OracleResult xt = prox_min(p, sp, y, z, kOracleTol, k.alpha);
      const Vec& yplus = xt.point2;
      const double dx2 = (xn - x).squaredNorm();
      const double dyp = (y - yplus).norm();
      const double dzx = (z - xn).norm();
      a.lhs = v1.value - v0.value;
      a.oracle_error = v0.error + v1.error;
      if (kind == AuditKind::Psi2DescentCoupled) {
        a.rhs = -dx2 / (8.0 * k.c) - dyp * dyp / (16.0 * k.alpha) - k.r_x * k.beta / 8.0 * dzx * dzx;
        a.oracle_error += detail::sq_err(1.0 / (16.0 * k.alpha), dyp, xt.certified_error2);
      } else {
        const OracleResult xt2 = prox_min(p, sp, yplus, z, kOracleTol);
        const OracleResult sd = saddle_solve(p, sp, z, 1e-22);
        const double gap = (sd.point - xt2.point).norm();
        a.rhs = -dx2 / (8.0 * k.c) - dyp * dyp / (8.0 * k.alpha) - k.r_x * k.beta / 8.0 * dzx * dzx +
                24.0 * k.r_x * k.beta * gap * gap;
        const double gap_err = sd.certified_error + xt2.certified_error + (l / (k.r_x - l)) * xt.certified_error2;
        a.oracle_error += detail::sq_err(1.0 / (8.0 * k.alpha), dyp, xt.certified_error2) +
                          detail::sq_err(24.0 * k.r_x * k.beta, gap, gap_err);
      }
      a.scale = 1.0 + std::abs(v0.value);
      break;
    }
    case AuditKind::PDescent: {
      const Vec &z = field(c.z, "z"), &zn = field(c.z_next, "z_next");
      const OracleResult p0 = ptilde(p, sp, z);
      const OracleResult p1 = ptilde(p, sp, zn);
      const Vec grad = k.r_x * (z - p0.point);
      const double gn = grad.norm();
      const double be = k.beta;
      a.lhs = p1.value - p0.value;
      a.rhs = -(be * (1.0 - be) / (2.0 * k.r_x)) * gn * gn + (be / (2.0 * (1.0 - be)) + be * be) * k.r_x * k.delta;
      a.scale = 1.0 + std::abs(p0.value);
      a.oracle_error = p0.value_error + p1.value_error +
                       detail::sq_err(be * (1.0 - be) / (2.0 * k.r_x), gn, k.r_x * p0.certified_error);
      break;
    }
  }
  a.slack = a.rhs - a.lhs;
  return a;
}

}  // namespace mmx
