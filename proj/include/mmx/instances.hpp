#pragma once

#include "mmx/config.hpp"
#include "mmx/spectral.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace mmx {

namespace detail {
inline double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// argmax over [0, d] of s*y - (r/2) y^2
inline double interval_argmax(double s, double r, double d) {
  if (r > 0.0) return clip(s / r, 0.0, d);
  return s > 0.0 ? d : 0.0;
}
}  // namespace detail

// Piecewise quadratic instance on X = R, Y = [0, D]:
//   f = 0                          for x < 0
//     = -l x^2/2 + b x y           for 0 <= x <= xbar
//     = -l r^2 D^2/(2 b^2) + r D y  for x > xbar
// with b = sqrt(3 l r) and xbar = r D / b.
struct GsHard {
  double ell, d_y, r_y, b, xbar;

  GsHard(double ell_, double d_y_, double r_y_) : ell(ell_), d_y(d_y_), r_y(r_y_) {
    require(ell > 0.0 && d_y > 0.0 && r_y > 0.0, Errc::invalid_argument, "gs-hard needs ell, D_Y, r_y > 0");
    b = std::sqrt(3.0 * ell * r_y);
    xbar = r_y * d_y / b;
  }

  double f(double x, double y) const {
    if (x < 0.0) return 0.0;
    if (x <= xbar) return -0.5 * ell * x * x + b * x * y;
    return -ell * r_y * r_y * d_y * d_y / (2.0 * b * b) + r_y * d_y * y;
  }
  double gx(double x, double y) const {
    if (x < 0.0) return 0.0;
    if (x <= xbar) return -ell * x + b * y;
    return 0.0;
  }
  // Coefficient of y in f(x, .), which is also grad_y f.
  double gy(double x, double /*y*/) const {
    if (x < 0.0) return 0.0;
    if (x <= xbar) return b * x;
    return r_y * d_y;
  }
  double proj_y(double y) const { return detail::clip(y, 0.0, d_y); }

  double y_star(double r, double x) const { return detail::interval_argmax(gy(x, 0.0), r, d_y); }
  double phi_tilde(double r, double x) const {
    const double y = y_star(r, x);
    return f(x, y) - 0.5 * r * y * y;
  }
  double phi_max() const { return 5.0 * r_y * d_y * d_y / 6.0; }

  MinimaxProblem problem() const;
};

// f(x, y) = h(x) y on X = R, Y = [0, D] with h even, quadratic on |x| <= 1,
// a concave splice on 1 < |x| < 2 and constant beyond.
struct OsHard {
  double ell, d_y, gamma;

  OsHard(double ell_, double d_y_) : ell(ell_), d_y(d_y_) {
    require(ell > 0.0 && d_y > 0.0, Errc::invalid_argument, "os-hard needs ell, D_Y > 0");
    gamma = d_y / (d_y + 1.0);
  }

  double h(double x) const {
    const double k = ell / (d_y + 1.0);
    const double a = std::abs(x);
    if (a <= 1.0) return 0.5 * k * x * x;
    if (a < 2.0) return k - 0.5 * k * (a - 2.0) * (a - 2.0);
    return k;
  }
  double dh(double x) const {
    const double k = ell / (d_y + 1.0);
    const double a = std::abs(x);
    if (a <= 1.0) return k * x;
    if (a < 2.0) return -k * (a - 2.0) * (x > 0.0 ? 1.0 : -1.0);
    return 0.0;
  }
  double f(double x, double y) const { return h(x) * y; }
  double gx(double x, double y) const { return dh(x) * y; }
  double gy(double x, double /*y*/) const { return h(x); }
  double proj_y(double y) const { return detail::clip(y, 0.0, d_y); }

  double y_star(double r, double x) const { return detail::interval_argmax(h(x), r, d_y); }
  double phi_tilde(double r, double x) const {
    const double y = y_star(r, x);
    return f(x, y) - 0.5 * r * y * y;
  }
  // 2 l |prox_{Phi/(2l)}(x) - x| on |x| <= 1, where Phi(u) = l D u^2 / (2(D+1)).
  double os_closed(double x) const { return 2.0 * ell * d_y / (3.0 * d_y + 2.0) * std::abs(x); }
  // Moreau envelope Phi_{1/(2l)}(x) on |x| <= 1.
  double moreau_envelope(double x) const { return ell * d_y / (3.0 * d_y + 2.0) * x * x; }
  double phi_max() const { return ell * d_y / (d_y + 1.0); }

  MinimaxProblem problem() const;
};

inline MinimaxProblem GsHard::problem() const {
  MinimaxProblem p;
  p.name = "gs-hard";
  p.dim_x = p.dim_y = 1;
  p.ell = ell;
  p.set_x = ProjectableSet::full_space(1);
  p.set_y = ProjectableSet::interval(0.0, d_y);
  const GsHard g = *this;
  p.f = [g](const Vec& x, const Vec& y) { return g.f(x[0], y[0]); };
  p.grad_x = [g](const Vec& x, const Vec& y, Vec& out) { out[0] = g.gx(x[0], y[0]); };
  p.grad_y = [g](const Vec& x, const Vec& y, Vec& out) { out[0] = g.gy(x[0], y[0]); };
  p.analytic.y_star = [g](double r, const Vec& x) { return vec1(g.y_star(r, x[0])); };
  p.analytic.phi_tilde = [g](double r, const Vec& x) { return g.phi_tilde(r, x[0]); };
  p.analytic.prox_region = [g](const Vec& x) {
    // Phi takes values in [0, 5 r D^2 / 6], so |prox - x|^2 <= max Phi / l.
    const double rad = std::sqrt(g.phi_max() / g.ell) * (1.0 + 1e-6) + 1e-12;
    return std::pair<Vec, Vec>(vec1(x[0] - rad), vec1(x[0] + rad));
  };
  p.analytic.minmax_value = [g](double r) -> std::optional<double> {
    // Phi~ >= 0 with Phi~(0) = 0 whenever the perturbation is no larger than the built-in r_y.
    if (r >= 0.0 && r <= g.r_y) return 0.0;
    return std::nullopt;
  };
  p.analytic.saddle = [g](double r_x, double r_y, const Vec& z) -> std::optional<std::pair<Vec, Vec>> {
    if (!(r_x > g.ell) || !(r_y > 0.0)) return std::nullopt;
    const double zz = z[0];
    if (zz <= 0.0) return std::pair<Vec, Vec>(vec1(zz), vec1(0.0));
    // Middle branch KKT: -l x + b y + r_x (x - z) = 0, b x = r_y y.
    const double x = r_x * zz / (r_x - g.ell + g.b * g.b / r_y);
    const double y = g.b * x / r_y;
    // F~(., y) is convex on the whole line only while the kink at xbar bends upward (y <= D/3).
    if (x < 0.0 || x > g.xbar || y > g.d_y / 3.0) return std::nullopt;
    return std::pair<Vec, Vec>(vec1(x), vec1(y));
  };
  return p;
}

inline MinimaxProblem OsHard::problem() const {
  MinimaxProblem p;
  p.name = "os-hard";
  p.dim_x = p.dim_y = 1;
  p.ell = ell;
  p.set_x = ProjectableSet::full_space(1);
  p.set_y = ProjectableSet::interval(0.0, d_y);
  const OsHard o = *this;
  p.f = [o](const Vec& x, const Vec& y) { return o.f(x[0], y[0]); };
  p.grad_x = [o](const Vec& x, const Vec& y, Vec& out) { out[0] = o.gx(x[0], y[0]); };
  p.grad_y = [o](const Vec& x, const Vec& y, Vec& out) { out[0] = o.gy(x[0], y[0]); };
  p.analytic.y_star = [o](double r, const Vec& x) { return vec1(o.y_star(r, x[0])); };
  p.analytic.phi_tilde = [o](double r, const Vec& x) { return o.phi_tilde(r, x[0]); };
  p.analytic.os_closed = [o](const Vec& x) -> std::optional<double> {
    if (std::abs(x[0]) <= 1.0) return o.os_closed(x[0]);
    return std::nullopt;
  };
  p.analytic.prox_region = [o](const Vec& x) {
    const double rad = std::sqrt(o.phi_max() / o.ell) * (1.0 + 1e-6) + 1e-12;
    return std::pair<Vec, Vec>(vec1(x[0] - rad), vec1(x[0] + rad));
  };
  p.analytic.minmax_value = [](double r) -> std::optional<double> {
    if (r >= 0.0) return 0.0;
    return std::nullopt;
  };
  p.analytic.saddle = [o](double r_x, double r_y, const Vec& z) -> std::optional<std::pair<Vec, Vec>> {
    if (!(r_x > o.ell) || !(r_y > 0.0)) return std::nullopt;
    // On |x| <= 1 with y = h(x)/r_y < D: k^2 x^3/(2 r_y) + r_x x - r_x z = 0, k = l/(D+1).
    const double k = o.ell / (o.d_y + 1.0);
    const double a = k * k / (2.0 * r_y);
    auto g = [&](double x) { return a * x * x * x + r_x * x - r_x * z[0]; };
    double lo = -1.0, hi = 1.0;
    if (g(lo) > 0.0 || g(hi) < 0.0) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    const double y = o.h(x) / r_y;
    if (y > o.d_y) return std::nullopt;
    return std::pair<Vec, Vec>(vec1(x), vec1(y));
  };
  return p;
}

// f(x, y) = -(a/2)|x|^2 + x^T B y with a box Y containing 0 and X either R^n or a box.
struct BilinearQuadratic {
  double a;
  Mat B;
  std::optional<std::pair<Vec, Vec>> x_box;
  Vec y_lo, y_hi;

  double ell() const {
    const double sb = Eigen::JacobiSVD<Mat>(B).singularValues()(0);
    return std::max(std::abs(a), sb);
  }

  MinimaxProblem problem() const {
    require(B.rows() > 0 && B.cols() > 0, Errc::invalid_argument, "B must be non-empty");
    require(y_lo.size() == B.cols() && y_hi.size() == B.cols(), Errc::dimension_mismatch, "Y box has wrong dimension");
    MinimaxProblem p;
    p.name = "bilinear-quadratic";
    p.dim_x = B.rows();
    p.dim_y = B.cols();
    p.ell = ell();
    p.set_x = x_box ? ProjectableSet::box(x_box->first, x_box->second) : ProjectableSet::full_space(B.rows());
    p.set_y = ProjectableSet::box(y_lo, y_hi);
    const BilinearQuadratic q = *this;
    p.f = [q](const Vec& x, const Vec& y) { return -0.5 * q.a * x.squaredNorm() + x.dot(q.B * y); };
    p.grad_x = [q](const Vec& x, const Vec& y, Vec& out) { out.noalias() = q.B * y; out -= q.a * x; };
    p.grad_y = [q](const Vec& x, const Vec& /*y*/, Vec& out) { out.noalias() = q.B.transpose() * x; };
    auto ystar = [q](double r, const Vec& x) {
      const Vec s = q.B.transpose() * x;
      Vec y(s.size());
      for (Index i = 0; i < s.size(); ++i) {
        if (r > 0.0) y[i] = detail::clip(s[i] / r, q.y_lo[i], q.y_hi[i]);
        else y[i] = s[i] > 0.0 ? q.y_hi[i] : (s[i] < 0.0 ? q.y_lo[i] : detail::clip(0.0, q.y_lo[i], q.y_hi[i]));
      }
      return y;
    };
    p.analytic.y_star = ystar;
    p.analytic.phi_tilde = [q, ystar](double r, const Vec& x) {
      const Vec y = ystar(r, x);
      return -0.5 * q.a * x.squaredNorm() + x.dot(q.B * y) - 0.5 * r * y.squaredNorm();
    };
    if (x_box) {
      const auto box = *x_box;
      p.analytic.prox_region = [box](const Vec&) { return box; };
    }
    p.analytic.saddle = [q](double r_x, double r_y, const Vec& z) -> std::optional<std::pair<Vec, Vec>> {
      if (!(r_y > 0.0) || !(r_x > q.a)) return std::nullopt;
      const Index n = q.B.rows();
      const Mat m = (r_x - q.a) * Mat::Identity(n, n) + q.B * q.B.transpose() / r_y;
      const Vec x = m.ldlt().solve(r_x * z);
      const Vec y = q.B.transpose() * x / r_y;
      const double tol = 1e-12;
      if (q.x_box && ((x.array() < q.x_box->first.array() + tol).any() ||
                      (x.array() > q.x_box->second.array() - tol).any()))
        return std::nullopt;
      if ((y.array() < q.y_lo.array() + tol).any() || (y.array() > q.y_hi.array() - tol).any()) return std::nullopt;
      return std::pair<Vec, Vec>(x, y);
    };
    return p;
  }
};

struct InstanceParams {
  double ell = 1.0;
  double d_y = 1.0;
  double r_y = 0.1;  // gs-hard only
};

// Default two-dimensional member of the bilinear-quadratic family, scaled so that
// its smoothness constant equals ell. Y = [-D/2, D/2]^2, X = [-2, 2]^2.
inline BilinearQuadratic default_bilinear(double ell, double d_y) {
  Mat B(2, 2);
  B << 1.0, 0.3, -0.2, 0.8;
  const double sb = Eigen::JacobiSVD<Mat>(B).singularValues()(0);
  BilinearQuadratic q;
  q.B = B * (ell / sb);
  q.a = 0.5 * ell;
  q.x_box = std::pair<Vec, Vec>(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
  q.y_lo = Vec::Constant(2, -0.5 * d_y);
  q.y_hi = Vec::Constant(2, 0.5 * d_y);
  return q;
}

inline std::vector<std::string> instance_names() { return {"gs-hard", "os-hard", "bilinear-quadratic"}; }

inline MinimaxProblem make_instance(const std::string& name, const InstanceParams& ip) {
  if (name == "gs-hard") return GsHard(ip.ell, ip.d_y, ip.r_y).problem();
  if (name == "os-hard") return OsHard(ip.ell, ip.d_y).problem();
  if (name == "bilinear-quadratic") return default_bilinear(ip.ell, ip.d_y).problem();
  throw Error(Errc::config, "unknown instance '" + name + "'");
}

enum class InitKind { PgdaGS, PsgdaGS, PgdaOS, PsgdaOS, SgdaOS };

inline std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::PgdaGS: return "pgda-gs";
    case InitKind::PsgdaGS: return "psgda-gs";
    case InitKind::PgdaOS: return "pgda-os";
    case InitKind::PsgdaOS: return "psgda-os";
    case InitKind::SgdaOS: return "sgda-os";
  }
  return "?";
}

inline InitKind init_kind_for(Algorithm a, Mode m) {
  if (a == Algorithm::PerturbedGda) return m == Mode::GS ? InitKind::PgdaGS : InitKind::PgdaOS;
  if (a == Algorithm::PerturbedSmoothedGda) return m == Mode::GS ? InitKind::PsgdaGS : InitKind::PsgdaOS;
  if (a == Algorithm::SmoothedGda && m == Mode::OS) return InitKind::SgdaOS;
  throw Error(Errc::config, "no eigenvector initialization for " + to_string(a) + "/" + to_string(m));
}

// Contraction rate of the state returned by eigen_init, when it is an exact eigenvector.
inline double eigen_init_rate(InitKind kind, const SolverConfig& cfg) {
  const double l = cfg.ell;
  switch (kind) {
    case InitKind::PgdaGS: {
      SpectralParams p = spectral_params_from(cfg, std::sqrt(3.0 * l * cfg.r_y), 0.0);
      return eigen_closed(EigenQuantity::Lambda1, p);
    }
    case InitKind::PsgdaGS: {
      SpectralParams p = spectral_params_from(cfg, std::sqrt(3.0 * l * cfg.r_y), 0.0);
      return eigen_closed(EigenQuantity::Lambda2Full, p);
    }
    case InitKind::PsgdaOS:
    case InitKind::SgdaOS: {
      SpectralParams p = spectral_params_from(cfg, 0.0, cfg.d_y / (cfg.d_y + 1.0));
      return eigen_closed(EigenQuantity::Lambda3, p);
    }
    case InitKind::PgdaOS: break;
  }
  throw Error(Errc::invalid_argument, "no contraction rate for this initialization");
}

// Eigenvector-aligned initial states on the hard instances. GS kinds live on
// gs-hard built with r_y = cfg.r_y; OS kinds on os-hard.
inline IterateState eigen_init(InitKind kind, double ell, double d_y, double epsilon, const SolverConfig& cfg) {
  require(ell > 0.0 && d_y > 0.0 && epsilon > 0.0, Errc::invalid_argument, "eigen_init needs positive constants");
  IterateState s;
  const double guard = 0.9;
  switch (kind) {
    case InitKind::PgdaGS: {
      require(cfg.algorithm == Algorithm::PerturbedGda, Errc::config, "pgda-gs init needs a pgda config");
      const GsHard g(ell, d_y, cfg.r_y);
      const double c = cfg.c, a = cfg.alpha, b = g.b;
      const double A1 = ell * c - a * cfg.r_y - a * b * b * c;
      const double B1 = a * c * (b * b - ell * cfg.r_y);
      const double x0 = 2.0 * epsilon / ell;
      const double y0 = 2.0 * b * (1.0 + ell * c) * a / (std::sqrt(A1 * A1 - 4.0 * B1) + 2.0 * ell * c - A1) * x0;
      require(x0 <= guard * g.xbar, Errc::outside_regime, "epsilon too large: x0 > 0.9 * xbar");
      require(y0 <= guard * d_y, Errc::outside_regime, "epsilon too large: y0 > 0.9 * D_Y");
      s.x = vec1(x0);
      s.y = vec1(y0);
      s.z = Vec();
      return s;
    }
    case InitKind::PsgdaGS: {
      require(cfg.algorithm == Algorithm::PerturbedSmoothedGda, Errc::config, "psgda-gs init needs a psgda config");
      const GsHard g(ell, d_y, cfg.r_y);
      const double lam = eigen_init_rate(kind, cfg);
      const double c = cfg.c, be = cfg.beta, rx = cfg.r_x, b = g.b;
      // The printed x0 = 2(beta+lam) eps/(r_x lam) is negative since lam < 0 < beta + lam;
      // its magnitude is used and y0, z0 keep their ratios to x0.
      const double x0 = std::abs(2.0 * (be + lam) * epsilon / (rx * lam));
      const double ry0 = (c * ell * be + c * ell * lam - c * rx * lam - be * lam + c * rx * be * lam - lam * lam) /
                         (b * c * (be + lam));
      const double rz0 = be * (1.0 + lam) / (be + lam);
      require(x0 <= guard * g.xbar, Errc::outside_regime, "epsilon too large: x0 > 0.9 * xbar");
      require(ry0 * x0 >= 0.0 && ry0 * x0 <= guard * d_y, Errc::outside_regime, "epsilon too large: y0 > 0.9 * D_Y");
      s.x = vec1(x0);
      s.y = vec1(ry0 * x0);
      s.z = vec1(rz0 * x0);
      return s;
    }
    case InitKind::PgdaOS:
    case InitKind::PsgdaOS:
    case InitKind::SgdaOS: {
      const double x0 = (3.0 * d_y + 2.0) * epsilon / (ell * d_y);
      require(x0 > 0.0 && x0 <= guard, Errc::outside_regime, "epsilon too large: x0 > 0.9");
      s.x = vec1(x0);
      s.y = vec1(d_y);
      if (kind == InitKind::PgdaOS) {
        require(cfg.algorithm == Algorithm::PerturbedGda, Errc::config, "pgda-os init needs a pgda config");
        s.z = Vec();
      } else {
        require(cfg.algorithm == (kind == InitKind::PsgdaOS ? Algorithm::PerturbedSmoothedGda : Algorithm::SmoothedGda),
                Errc::config, "os init kind does not match the config algorithm");
        SpectralParams p = spectral_params_from(cfg, 0.0, d_y / (d_y + 1.0));
        const double v1 = eigen_closed(EigenQuantity::V1Exact, p);
        const double z0 = x0 / v1;
        require(z0 > 0.0 && z0 <= guard, Errc::outside_regime, "epsilon too large: z0 > 0.9");
        s.z = vec1(z0);
      }
      return s;
    }
  }
  throw Error(Errc::invalid_argument, "unknown init kind");
}

// Fixed, non-adversarial start (xbar/2, 0, xbar/2) on gs-hard.
inline IterateState fixed_init(const GsHard& g, bool with_z) {
  IterateState s;
  s.x = vec1(0.5 * g.xbar);
  s.y = vec1(0.0);
  s.z = with_z ? vec1(0.5 * g.xbar) : Vec();
  return s;
}

// Comparison process with y frozen at D: one application of I + M3 to (x', z').
inline std::pair<double, double> frozen_dual_step(double ell, double d_y, const SolverConfig& cfg, double x,
                                                  double z) {
  const double gamma = d_y / (d_y + 1.0);
  const double a3 = ell * cfg.c * gamma + cfg.c * cfg.r_x;
  const double xn = (1.0 - a3) * x + cfg.c * cfg.r_x * z;
  const double zn = cfg.beta * (1.0 - a3) * x + (1.0 - cfg.beta + cfg.beta * cfg.c * cfg.r_x) * z;
  return {xn, zn};
}

}  // namespace mmx
