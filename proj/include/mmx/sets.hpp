#pragma once

#include "mmx/types.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

namespace mmx {

struct FullSpace {
  Index dim;
};
struct Box {
  Vec lower, upper;
};
struct Ball {
  Vec center;
  double radius;
};
struct Interval {
  double lo, hi;
};

inline double feasibility_tol(const Vec& x) { return 1e-10 * (1.0 + x.norm()); }

// One coordinate of dist(0, g + N_[lo,hi](x)).
inline double interval_residual(double x, double g, double lo, double hi, double tol) {
  const bool at_lo = x <= lo + tol;
  const bool at_hi = x >= hi - tol;
  if (at_lo && at_hi) return 0.0;
  if (at_lo) return g < 0.0 ? -g : 0.0;
  if (at_hi) return g > 0.0 ? g : 0.0;
  return std::abs(g);
}

class ProjectableSet {
 public:
  using Variant = std::variant<FullSpace, Box, Ball, Interval>;

  ProjectableSet() : v_(FullSpace{1}) {}

  static ProjectableSet full_space(Index dim) {
    require(dim > 0, Errc::invalid_argument, "full space dimension must be positive");
    return ProjectableSet(FullSpace{dim});
  }
  static ProjectableSet box(const Vec& lower, const Vec& upper) {
    require(lower.size() == upper.size() && lower.size() > 0, Errc::dimension_mismatch,
            "box bounds must have equal positive length");
    require(lower.allFinite() && upper.allFinite(), Errc::non_finite, "box bounds must be finite");
    require((lower.array() <= upper.array()).all(), Errc::invalid_argument, "box needs lower <= upper");
    return ProjectableSet(Box{lower, upper});
  }
  static ProjectableSet ball(const Vec& center, double radius) {
    require(center.size() > 0, Errc::dimension_mismatch, "ball center is empty");
    require(center.allFinite() && std::isfinite(radius), Errc::non_finite, "ball must be finite");
    require(radius >= 0.0, Errc::invalid_argument, "ball radius must be >= 0");
    return ProjectableSet(Ball{center, radius});
  }
  static ProjectableSet interval(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi), Errc::non_finite, "interval bounds must be finite");
    require(lo <= hi, Errc::invalid_argument, "interval needs lo <= hi");
    return ProjectableSet(Interval{lo, hi});
  }

  const Variant& variant() const { return v_; }

  Index dim() const {
    return std::visit(
        [](const auto& s) -> Index {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FullSpace>) return s.dim;
          else if constexpr (std::is_same_v<S, Box>) return s.lower.size();
          else if constexpr (std::is_same_v<S, Ball>) return s.center.size();
          else return 1;
        },
        v_);
  }

  bool bounded() const { return !std::holds_alternative<FullSpace>(v_); }

  double diameter() const {
    return std::visit(
        [](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FullSpace>) return std::numeric_limits<double>::infinity();
          else if constexpr (std::is_same_v<S, Box>) return (s.upper - s.lower).norm();
          else if constexpr (std::is_same_v<S, Ball>) return 2.0 * s.radius;
          else return s.hi - s.lo;
        },
        v_);
  }

  bool contains(const Vec& x) const {
    if (x.size() != dim() || !x.allFinite()) return false;
    const double tol = feasibility_tol(x);
    return std::visit(
        [&](const auto& s) -> bool {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FullSpace>) return true;
          else if constexpr (std::is_same_v<S, Box>)
            return ((x.array() >= s.lower.array() - tol) && (x.array() <= s.upper.array() + tol)).all();
          else if constexpr (std::is_same_v<S, Ball>) return (x - s.center).norm() <= s.radius + tol;
          else return x[0] >= s.lo - tol && x[0] <= s.hi + tol;
        },
        v_);
  }

  // Unchecked projection used inside solver loops; out may alias p.
  void project_into(const Vec& p, Vec& out) const {
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FullSpace>) {
            if (&out != &p) out = p;
          } else if constexpr (std::is_same_v<S, Box>) {
            out = p.cwiseMax(s.lower).cwiseMin(s.upper);
          } else if constexpr (std::is_same_v<S, Ball>) {
            const double d = (p - s.center).norm();
            if (d <= s.radius) {
              if (&out != &p) out = p;
            } else {
              out = s.center + (s.radius / d) * (p - s.center);
            }
          } else {
            out.resize(1);
            out[0] = std::min(std::max(p[0], s.lo), s.hi);
          }
        },
        v_);
  }

  Vec project(const Vec& p) const {
    require(p.size() == dim(), Errc::dimension_mismatch, "projection input has wrong dimension");
    require(p.allFinite(), Errc::non_finite, "projection input contains NaN or Inf");
    Vec out(p.size());
    project_into(p, out);
    return out;
  }

  // dist(0, g + N_set(x)) for x on the set.
  double normal_cone_residual(const Vec& x, const Vec& g) const {
    require(x.size() == dim() && g.size() == dim(), Errc::dimension_mismatch,
            "normal cone residual arguments have wrong dimension");
    require(contains(x), Errc::infeasible_point, "point is outside the set beyond tolerance");
    const double tol = feasibility_tol(x);
    return std::visit(
        [&](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FullSpace>) {
            return g.norm();
          } else if constexpr (std::is_same_v<S, Ball>) {
            const Vec d = x - s.center;
            const double dn = d.norm();
            if (s.radius == 0.0) return 0.0;
            if (dn < s.radius - tol) return g.norm();
            const Vec n = d / dn;
            return (g - std::min(0.0, g.dot(n)) * n).norm();
          } else {
            double acc = 0.0;
            for (Index i = 0; i < x.size(); ++i) {
              double lo, hi;
              if constexpr (std::is_same_v<S, Box>) {
                lo = s.lower[i];
                hi = s.upper[i];
              } else {
                lo = s.lo;
                hi = s.hi;
              }
              const double r = interval_residual(x[i], g[i], lo, hi, tol);
              acc += r * r;
            }
            return std::sqrt(acc);
          }
        },
        v_);
  }

  std::string describe() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, FullSpace>) os << "R^" << s.dim;
          else if constexpr (std::is_same_v<S, Box>) os << "box(" << s.lower.size() << ")";
          else if constexpr (std::is_same_v<S, Ball>) os << "ball(r=" << s.radius << ")";
          else os << "[" << s.lo << ", " << s.hi << "]";
        },
        v_);
    return os.str();
  }

 private:
  explicit ProjectableSet(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

inline Vec project(const ProjectableSet& set, const Vec& p) { return set.project(p); }

inline double normal_cone_residual(const ProjectableSet& set, const Vec& x, const Vec& g) {
  return set.normal_cone_residual(x, g);
}

}  // namespace mmx
