#pragma once

#include "mmx/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace mmx {

enum class Algorithm { TsGda, PerturbedGda, SmoothedGda, PerturbedSmoothedGda, PerturbedSmoothedFoam };
enum class Mode { GS, OS };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::TsGda: return "tsgda";
    case Algorithm::PerturbedGda: return "pgda";
    case Algorithm::SmoothedGda: return "sgda";
    case Algorithm::PerturbedSmoothedGda: return "psgda";
    case Algorithm::PerturbedSmoothedFoam: return "foam";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::TsGda, Algorithm::PerturbedGda, Algorithm::SmoothedGda,
                      Algorithm::PerturbedSmoothedGda, Algorithm::PerturbedSmoothedFoam})
    if (to_string(a) == s) return a;
  throw Error(Errc::config, "unknown algorithm '" + s + "'");
}

inline std::string to_string(Mode m) { return m == Mode::GS ? "gs" : "os"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "gs") return Mode::GS;
  if (s == "os") return Mode::OS;
  throw Error(Errc::config, "unknown mode '" + s + "'");
}

inline bool smooths(Algorithm a) {
  return a == Algorithm::SmoothedGda || a == Algorithm::PerturbedSmoothedGda ||
         a == Algorithm::PerturbedSmoothedFoam;
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::PerturbedGda;
  double c = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double r_x = 0.0;
  double r_y = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  Mode mode = Mode::GS;
  long max_iters = 1000000;
  std::uint64_t seed = 0;
  // Problem constants the Conditions are stated in.
  double ell = 1.0;
  double d_y = 1.0;

  SurrogateParams surrogate() const { return {r_x, r_y}; }

  // Dual error-bound constant of the NC-SC surrogate.
  double omega() const {
    const double m = r_x - ell;
    return (1.0 / std::sqrt(2.0 * r_y)) * (m + alpha * ell * (3.0 * r_x - 2.0 * ell)) / (alpha * std::pow(m, 1.5));
  }
};

// Iterate (x_t, y_t, z_t); z is empty for methods without smoothing.
struct IterateState {
  long t = 0;
  Vec x, y, z;
  double last_step_x = 0.0;
  double last_step_y = 0.0;
};

namespace detail {

// Inclusive comparison with rounding room; caps are computed in the same
// floating point expressions, so equality must pass.
inline bool le(double a, double b) { return a <= b * (1.0 + 1e-12) + 1e-300; }

inline double psgda_alpha_cap(double ell, double r_x, double c) {
  const double m = r_x - ell;
  const double q = 1.0 + c * m;
  return std::min(1.0 / (11.0 * ell), c * c * m * m / (4.0 * ell * q * q));
}

inline double smoothed_static_beta_cap(double ell, double r_x) {
  const double m = r_x - ell;
  const double p = r_x + ell;
  return std::min(1.0 / 36.0, m * m / (384.0 * r_x * p * p));
}

}  // namespace detail

// Names every violated inequality; empty means the config is admissible.
inline std::vector<std::string> condition_violations(const SolverConfig& k) {
  std::vector<std::string> v;
  auto check = [&](bool ok, const char* what) {
    if (!ok) v.emplace_back(what);
  };
  const double l = k.ell;
  check(l > 0.0, "ell > 0");
  check(k.d_y > 0.0, "D_Y > 0");
  check(k.epsilon > 0.0 && k.epsilon < 1.0, "0 < epsilon < 1");
  check(k.max_iters >= 0, "max_iters >= 0");
  switch (k.algorithm) {
    case Algorithm::TsGda:
      check(k.r_x == 0.0 && k.r_y == 0.0, "TS-GDA uses r_x = r_y = 0");
      check(k.c > 0.0 && k.alpha > 0.0, "c > 0 and alpha > 0");
      check(std::abs(k.alpha / k.c - 16.0 * l * l) <= 1e-9 * 16.0 * l * l, "alpha / c = 16 ell^2");
      break;
    case Algorithm::PerturbedGda: {
      check(k.r_y > 0.0, "r_y > 0");
      check(k.r_x == 0.0, "r_x = 0");
      check(k.alpha > 0.0 && detail::le(k.alpha, 1.0 / (4.0 * (l + k.r_y))), "0 < alpha <= 1/(4(ell+r_y))");
      check(k.c > 0.0 && detail::le(k.c, k.r_y * k.r_y * k.alpha / (16.0 * l * l)),
            "0 < c <= r_y^2 alpha/(16 ell^2)");
      check(detail::le(k.c, k.r_y / (l * (3.0 * k.r_y + 2.0 * l))), "c <= r_y/(ell(3 r_y + 2 ell))");
      break;
    }
    case Algorithm::SmoothedGda:
    case Algorithm::PerturbedSmoothedGda: {
      const bool perturbed = k.algorithm == Algorithm::PerturbedSmoothedGda;
      check(k.r_x > 3.0 * l, "r_x > 3 ell");
      check(k.c > 0.0 && k.c < 1.0 / (k.r_x + l), "0 < c < 1/(r_x+ell)");
      check(k.alpha > 0.0 && detail::le(k.alpha, detail::psgda_alpha_cap(l, k.r_x, k.c)),
            "0 < alpha <= min(1/(11 ell), c^2(r_x-ell)^2/(4 ell (1+c(r_x-ell))^2))");
      check(k.beta > 0.0 && detail::le(k.beta, detail::smoothed_static_beta_cap(l, k.r_x)),
            "0 < beta <= min(1/36, (r_x-ell)^2/(384 r_x (r_x+ell)^2))");
      if (perturbed) {
        check(k.r_y > 0.0, "r_y > 0");
        if (k.r_y > 0.0 && k.r_x > l && k.alpha > 0.0) {
          const double w = k.omega();
          check(detail::le(k.beta, 1.0 / (384.0 * k.r_x * k.alpha * w * w)), "beta <= 1/(384 r_x alpha omega^2)");
        }
        check(detail::le(k.beta, k.r_y / l), "beta <= r_y/ell");
      } else {
        check(k.r_y == 0.0, "r_y = 0");
      }
      break;
    }
    case Algorithm::PerturbedSmoothedFoam: {
      check(k.r_x > 3.0 * l, "r_x > 3 ell");
      check(k.r_y > 0.0, "r_y > 0");
      check(k.beta > 0.0 && k.beta < 1.0, "0 < beta < 1");
      const double ry2 = k.r_y * k.r_y;
      check(k.delta > 0.0 && detail::le(k.delta, ry2 * ry2 * k.d_y * k.d_y / (l * l * l * l)),
            "0 < delta <= r_y^4 D_Y^2/ell^4");
      check(k.alpha > 0.0 && detail::le(k.alpha, 1.0 / (k.r_x + l)), "0 < alpha <= 1/(r_x+ell) (post step)");
      check(k.c > 0.0 && detail::le(k.c, 1.0 / (k.r_y + l)), "0 < c <= 1/(r_y+ell) (post step)");
      break;
    }
  }
  return v;
}

inline void validate_config(const SolverConfig& k) {
  const auto v = condition_violations(k);
  if (!v.empty()) throw Error(Errc::condition_violated, v.front());
}

inline SolverConfig select_config(Algorithm alg, double ell, double d_y, double epsilon, Mode mode) {
  require(ell > 0.0 && std::isfinite(ell), Errc::invalid_argument, "ell must be positive");
  require(d_y > 0.0 && std::isfinite(d_y), Errc::invalid_argument, "D_Y must be positive");
  require(epsilon > 0.0, Errc::invalid_argument, "epsilon must be positive");
  require(epsilon < 1.0, Errc::invalid_argument, "epsilon must be < 1");
  SolverConfig k;
  k.algorithm = alg;
  k.ell = ell;
  k.d_y = d_y;
  k.epsilon = epsilon;
  k.mode = mode;
  const double ry_prescribed = mode == Mode::GS ? epsilon / d_y : epsilon * epsilon / (ell * d_y * d_y);
  switch (alg) {
    case Algorithm::TsGda:
      k.alpha = 1.0 / (4.0 * ell);
      k.c = k.alpha / (16.0 * ell * ell);
      break;
    case Algorithm::PerturbedGda:
      k.r_y = ry_prescribed;
      k.alpha = 1.0 / (4.0 * (ell + k.r_y));
      k.c = std::min(k.r_y * k.r_y * k.alpha / (16.0 * ell * ell), k.r_y / (ell * (3.0 * k.r_y + 2.0 * ell)));
      break;
    case Algorithm::SmoothedGda:
    case Algorithm::PerturbedSmoothedGda: {
      k.r_x = 4.0 * ell;
      k.c = 0.9 / (k.r_x + ell);
      k.alpha = detail::psgda_alpha_cap(ell, k.r_x, k.c);
      const double cap = detail::smoothed_static_beta_cap(ell, k.r_x);
      if (alg == Algorithm::PerturbedSmoothedGda) {
        k.r_y = ry_prescribed;
        const double w = k.omega();
        k.beta = std::min({cap, 1.0 / (384.0 * k.r_x * k.alpha * w * w), k.r_y / ell});
      } else {
        // beta = Theta(eps^2/(ell^2 D^2)) with the Theta constant equal to the static
        // cap, so beta stays proportional to eps^2 below eps = ell D.
        const double s = epsilon / (ell * d_y);
        k.beta = cap * std::min(1.0, s * s);
      }
      break;
    }
    case Algorithm::PerturbedSmoothedFoam: {
      k.r_x = 4.0 * ell;
      k.r_y = ry_prescribed;
      k.beta = 0.5;
      const double ry2 = k.r_y * k.r_y;
      k.delta = ry2 * ry2 * d_y * d_y / (ell * ell * ell * ell);
      k.alpha = 0.9 / (k.r_x + ell);
      k.c = 0.9 / (k.r_y + ell);
      break;
    }
  }
  validate_config(k);
  return k;
}

}  // namespace mmx
