#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mmx {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  infeasible_point,
  oracle_unavailable,
  not_strongly_convex,
  condition_violated,
  not_converged,
  outside_regime,
  missing_field,
  io,
  config,
};

inline const char* to_string(Errc e) {
  switch (e) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::non_finite: return "non-finite value";
    case Errc::infeasible_point: return "infeasible point";
    case Errc::oracle_unavailable: return "oracle unavailable";
    case Errc::not_strongly_convex: return "surrogate not strongly convex";
    case Errc::condition_violated: return "condition violated";
    case Errc::not_converged: return "not converged";
    case Errc::outside_regime: return "outside regime";
    case Errc::missing_field: return "missing field";
    case Errc::io: return "i/o error";
    case Errc::config: return "config error";
  }
  return "unknown";
}

// Every failure in the library is reported through this type so callers can
// branch on code() instead of parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

inline Vec vec1(double v) {
  Vec out(1);
  out[0] = v;
  return out;
}

}  // namespace mmx
