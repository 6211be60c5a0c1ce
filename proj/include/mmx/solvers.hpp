#pragma once

#include "mmx/instances.hpp"
#include "mmx/scsc.hpp"
#include "mmx/stationarity.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace mmx {

// Raised when a gradient turns non-finite; carries the iterate that produced it.
class SolverAbort : public Error {
 public:
  SolverAbort(IterateState s, const std::string& what) : Error(Errc::non_finite, what), state_(std::move(s)) {}
  const IterateState& state() const noexcept { return state_; }

 private:
  IterateState state_;
};

struct AuditRow {
  long t = 0;
  StationarityReport report;
  std::optional<double> psi;
};

struct IterateTrace {
  SolverConfig config;
  std::string instance;
  std::vector<IterateState> states;
  std::vector<AuditRow> audits;
  long iterations = 0;
  long grad_calls = 0;
  std::optional<long> first_hit;
  IterateState final_state;
  double iterate_ms = 0.0;
  double audit_ms = 0.0;

  // FOAM only: per outer t, |r_x (z_t - x_{t+1})| and the inner evaluation count.
  std::vector<double> grad_p_estimate;
  std::vector<long> inner_evaluations;
};

struct RunOptions {
  std::optional<Mode> metric;  // stop at the first iterate whose residual is <= eps
  double eps = 0.0;
  long max_iters = -1;         // < 0 uses cfg.max_iters
  long record_stride = 1;      // 0 keeps only the first and last state
  long audit_stride = 0;       // 0 disables periodic StationarityReport rows
  bool with_psi = false;       // attach the Lyapunov value to audit rows
  bool check_conditions = true;  // false only for deliberate negative controls
};

namespace detail {

inline void check_finite(const Vec& g, const IterateState& s, const char* which) {
  if (!g.allFinite())
    throw SolverAbort(s, std::string("non-finite ") + which + " gradient at t=" + std::to_string(s.t));
}

inline void check_finite(double g, const IterateState& s, const char* which) {
  if (!std::isfinite(g))
    throw SolverAbort(s, std::string("non-finite ") + which + " gradient at t=" + std::to_string(s.t));
}

}  // namespace detail

struct StepBuffers {
  Vec gx, gy, xn, yn;
};

// One iteration of a single-loop method. out may alias s.
inline void step_into(const MinimaxProblem& p, const SolverConfig& k, const IterateState& s, IterateState& out,
                      StepBuffers& w) {
  require(k.algorithm != Algorithm::PerturbedSmoothedFoam, Errc::invalid_argument,
          "the double-loop method has no single step; use foam_run");
  const bool smooth = smooths(k.algorithm);
  w.gx.resize(p.dim_x);
  w.gy.resize(p.dim_y);
  p.grad_x(s.x, s.y, w.gx);
  detail::check_finite(w.gx, s, "primal");
  if (k.algorithm == Algorithm::TsGda) {
    p.grad_y(s.x, s.y, w.gy);
    detail::check_finite(w.gy, s, "dual");
  }
  if (smooth) w.gx += k.r_x * (s.x - s.z);
  w.xn = s.x - k.c * w.gx;
  p.set_x.project_into(w.xn, w.xn);
  if (k.algorithm != Algorithm::TsGda) {
    p.grad_y(w.xn, s.y, w.gy);
    detail::check_finite(w.gy, s, "dual");
  }
  if (k.r_y != 0.0) w.gy -= k.r_y * s.y;
  w.yn = s.y + k.alpha * w.gy;
  p.set_y.project_into(w.yn, w.yn);
  if (smooth) out.z = s.z + k.beta * (w.xn - s.z);
  else out.z.resize(0);
  out.last_step_x = (w.xn - s.x).norm();
  out.last_step_y = (w.yn - s.y).norm();
  out.x.swap(w.xn);
  out.y.swap(w.yn);
  out.t = s.t + 1;
}

inline IterateState step(const MinimaxProblem& p, const SolverConfig& k, const IterateState& s) {
  p.check_dims(s.x, s.y);
  require(!smooths(k.algorithm) || s.z.size() == p.dim_x, Errc::dimension_mismatch, "smoothed methods need z");
  StepBuffers w;
  IterateState out;
  step_into(p, k, s, out, w);
  return out;
}

namespace detail {

inline LyapunovKind lyapunov_for(Algorithm a) {
  if (a == Algorithm::PerturbedSmoothedFoam) return LyapunovKind::PTilde;
  return smooths(a) ? LyapunovKind::Psi2 : LyapunovKind::Psi1;
}

inline AuditRow audit_row(const MinimaxProblem& p, const SolverConfig& k, const IterateState& s, bool with_psi) {
  AuditRow row;
  row.t = s.t;
  bool os_ok = true;
  try {
    row.report = stationarity_report(p, s.x, s.y, true);
  } catch (const Error& e) {
    if (e.code() != Errc::oracle_unavailable) throw;
    os_ok = false;
  }
  if (!os_ok) row.report = stationarity_report(p, s.x, s.y, false);
  if (with_psi) {
    try {
      row.psi = lyapunov(p, k.surrogate(), lyapunov_for(k.algorithm), s.x, s.y, s.z).value;
    } catch (const Error& e) {
      if (e.code() != Errc::oracle_unavailable && e.code() != Errc::not_strongly_convex) throw;
    }
  }
  return row;
}

inline double metric_value(const MinimaxProblem& p, Mode m, const Vec& x, const Vec& y) {
  if (m == Mode::GS) return gs_residual(p, x, y).gs();
  return os_residual(p, x).value;
}

// Iteration kernel over the generic vector interface.
class VecKernel {
 public:
  VecKernel(const MinimaxProblem& p, const SolverConfig& k, IterateState s) : p_(p), k_(k), s_(std::move(s)) {}
  void advance() { step_into(p_, k_, s_, s_, w_); }
  double metric(Mode m) const { return metric_value(p_, m, s_.x, s_.y); }
  const IterateState& state() const { return s_; }
  long t() const { return s_.t; }

 private:
  const MinimaxProblem& p_;
  const SolverConfig& k_;
  IterateState s_;
  StepBuffers w_;
};

template <class Inst>
constexpr bool has_os_closed = requires(const Inst& i) { i.os_closed(0.0); };

// Same arithmetic as VecKernel for one-dimensional instances with X = R and
// Y = [0, D], without std::function or heap traffic.
template <class Inst>
class ScalarKernel {
 public:
  ScalarKernel(const Inst& inst, const MinimaxProblem& p, const SolverConfig& k, const IterateState& s)
      : inst_(inst), p_(p), k_(k), t_(s.t), x_(s.x[0]), y_(s.y[0]), z_(smooths(k.algorithm) ? s.z[0] : 0.0),
        sx_(s.last_step_x), sy_(s.last_step_y) {}

  void advance() {
    const bool smooth = smooths(k_.algorithm);
    const bool ts = k_.algorithm == Algorithm::TsGda;
    double gx = inst_.gx(x_, y_);
    if (!std::isfinite(gx)) throw SolverAbort(state(), "non-finite primal gradient at t=" + std::to_string(t_));
    double gy = 0.0;
    if (ts) {
      gy = inst_.gy(x_, y_);
      if (!std::isfinite(gy)) throw SolverAbort(state(), "non-finite dual gradient at t=" + std::to_string(t_));
    }
    if (smooth) gx += k_.r_x * (x_ - z_);
    const double xn = x_ - k_.c * gx;
    if (!ts) {
      gy = inst_.gy(xn, y_);
      if (!std::isfinite(gy)) throw SolverAbort(state(), "non-finite dual gradient at t=" + std::to_string(t_));
    }
    if (k_.r_y != 0.0) gy -= k_.r_y * y_;
    const double yn = inst_.proj_y(y_ + k_.alpha * gy);
    if (smooth) z_ = z_ + k_.beta * (xn - z_);
    const double dx = xn - x_, dy = yn - y_;
    sx_ = std::sqrt(dx * dx);
    sy_ = std::sqrt(dy * dy);
    x_ = xn;
    y_ = yn;
    ++t_;
  }

  double metric(Mode m) const {
    if (m == Mode::GS) {
      const double g1 = inst_.gx(x_, y_);
      const double g2 = -inst_.gy(x_, y_);
      const double primal = std::sqrt(g1 * g1);
      const double r = interval_residual(y_, g2, 0.0, inst_.d_y, 1e-10 * (1.0 + std::sqrt(y_ * y_)));
      const double dual = std::sqrt(r * r);
      return std::max(primal, dual);
    }
    if constexpr (has_os_closed<Inst>) {
      if (std::abs(x_) <= 1.0) return inst_.os_closed(x_);
    }
    return os_residual(p_, vec1(x_)).value;
  }

  IterateState state() const {
    IterateState s;
    s.t = t_;
    s.x = vec1(x_);
    s.y = vec1(y_);
    s.z = smooths(k_.algorithm) ? vec1(z_) : Vec();
    s.last_step_x = sx_;
    s.last_step_y = sy_;
    return s;
  }
  long t() const { return t_; }

 private:
  const Inst& inst_;
  const MinimaxProblem& p_;
  const SolverConfig& k_;
  long t_;
  double x_, y_, z_, sx_, sy_;
};

template <class Kernel>
IterateTrace drive(Kernel& kern, const MinimaxProblem& p, const SolverConfig& k, const RunOptions& o) {
  using clock = std::chrono::steady_clock;
  IterateTrace tr;
  tr.config = k;
  tr.instance = p.name;
  const long max_iters = o.max_iters >= 0 ? o.max_iters : k.max_iters;
  const long t0 = kern.t();
  double audit_ms = 0.0;
  const auto start = clock::now();

  auto audit = [&]() {
    const auto a = clock::now();
    tr.audits.push_back(audit_row(p, k, kern.state(), o.with_psi));
    audit_ms += std::chrono::duration<double, std::milli>(clock::now() - a).count();
  };
  auto hit = [&]() { return o.metric && kern.metric(*o.metric) <= o.eps; };

  tr.states.push_back(kern.state());
  if (o.audit_stride > 0) audit();
  bool done = hit();
  if (done) tr.first_hit = 0;
  long n = 0;
  while (!done && n < max_iters) {
    kern.advance();
    ++n;
    const long t = kern.t();
    if (o.record_stride > 0 && (t - t0) % o.record_stride == 0) tr.states.push_back(kern.state());
    if (o.audit_stride > 0 && (t - t0) % o.audit_stride == 0) audit();
    if (hit()) {
      tr.first_hit = n;
      done = true;
    }
  }
  tr.iterations = n;
  tr.grad_calls = 2 * n;
  tr.final_state = kern.state();
  if (tr.states.back().t != tr.final_state.t) tr.states.push_back(tr.final_state);
  tr.audit_ms = audit_ms;
  tr.iterate_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count() - audit_ms;
  return tr;
}

inline void check_run_inputs(const MinimaxProblem& p, const SolverConfig& k, const IterateState& init,
                             const RunOptions& o) {
  if (o.check_conditions) validate_config(k);
  p.check_dims(init.x, init.y);
  require(p.set_x.contains(init.x) && p.set_y.contains(init.y), Errc::infeasible_point, "initial state is infeasible");
  require(!smooths(k.algorithm) || init.z.size() == p.dim_x, Errc::dimension_mismatch, "smoothed methods need z");
  if (o.metric) {
    require(o.eps > 0.0, Errc::invalid_argument, "stopping target must be positive");
    // Surfaces a missing metric oracle before any iteration.
    (void)metric_value(p, *o.metric, init.x, init.y);
  }
}

}  // namespace detail

struct FoamOptions {
  long outer_iters = 100;
  std::optional<Mode> metric;  // stop at the first outer t whose post-processed point meets eps
  double eps = 0.0;
  long record_stride = 1;
  long audit_stride = 0;
  bool with_psi = false;
};

struct FoamResult {
  IterateTrace trace;
  long t_star = 0;
  Vec x_hat, y_hat;
  StationarityReport report;
};

namespace detail {

// Single projected gradient step from (x, y) on F~(., ., z) with the x-step alpha and y-step c.
inline std::pair<Vec, Vec> foam_post_step(const MinimaxProblem& p, const SolverConfig& k, const Vec& x,
                                          const Vec& y, const Vec& z) {
  auto [gx, gy] = surrogate_grads(p, k.surrogate(), x, y, z);
  Vec xh = x - k.alpha * gx;
  Vec yh = y + k.c * gy;
  p.set_x.project_into(xh, xh);
  p.set_y.project_into(yh, yh);
  return {std::move(xh), std::move(yh)};
}

}  // namespace detail

inline FoamResult foam_run(const MinimaxProblem& p, const SolverConfig& k, const IterateState& init,
                           const FoamOptions& o) {
  using clock = std::chrono::steady_clock;
  require(k.algorithm == Algorithm::PerturbedSmoothedFoam, Errc::config, "foam_run needs a foam config");
  validate_config(k);
  p.check_dims(init.x, init.y);
  require(init.z.size() == p.dim_x, Errc::dimension_mismatch, "foam needs z");
  require(o.outer_iters >= 1, Errc::invalid_argument, "foam needs at least one outer iteration");
  if (o.metric) require(o.eps > 0.0, Errc::invalid_argument, "stopping target must be positive");
  const SurrogateParams sp = k.surrogate();
  FoamResult res;
  IterateTrace& tr = res.trace;
  tr.config = k;
  tr.instance = p.name;
  IterateState s = init;
  tr.states.push_back(s);
  double audit_ms = 0.0;
  const auto start = clock::now();
  auto audit = [&]() {
    const auto a = clock::now();
    tr.audits.push_back(detail::audit_row(p, k, s, o.with_psi));
    audit_ms += std::chrono::duration<double, std::milli>(clock::now() - a).count();
  };
  if (o.audit_stride > 0) audit();
  long calls = 0;
  std::vector<Vec> z_hist, x_next, y_next;
  for (long t = 0; t < o.outer_iters; ++t) {
    ScscResult sc;
    try {
      sc = inner_scsc(p, sp, s.z, k.delta, s.x, s.y);
    } catch (const Error& e) {
      throw Error(e.code(), "outer iteration " + std::to_string(t) + ": " + e.what());
    }
    calls += sc.evaluations;
    tr.inner_evaluations.push_back(sc.evaluations);
    tr.grad_p_estimate.push_back((k.r_x * (s.z - sc.x)).norm());
    z_hist.push_back(s.z);
    x_next.push_back(sc.x);
    y_next.push_back(sc.y);
    IterateState n;
    n.t = s.t + 1;
    n.last_step_x = (sc.x - s.x).norm();
    n.last_step_y = (sc.y - s.y).norm();
    n.z = s.z + k.beta * (sc.x - s.z);
    n.x = std::move(sc.x);
    n.y = std::move(sc.y);
    s = std::move(n);
    ++tr.iterations;
    if (o.record_stride > 0 && s.t % o.record_stride == 0) tr.states.push_back(s);
    if (o.audit_stride > 0 && s.t % o.audit_stride == 0) audit();
    if (o.metric) {
      auto [xh, yh] = detail::foam_post_step(p, k, x_next.back(), y_next.back(), z_hist.back());
      if (detail::metric_value(p, *o.metric, xh, yh) <= o.eps) {
        tr.first_hit = t + 1;
        break;
      }
    }
  }
  // The first index attaining the minimum estimated |grad p~|.
  long ts = 0;
  for (long t = 1; t < static_cast<long>(tr.grad_p_estimate.size()); ++t)
    if (tr.grad_p_estimate[t] < tr.grad_p_estimate[ts]) ts = t;
  if (tr.first_hit) ts = *tr.first_hit - 1;
  res.t_star = ts;
  auto [xh, yh] = detail::foam_post_step(p, k, x_next[ts], y_next[ts], z_hist[ts]);
  res.x_hat = std::move(xh);
  res.y_hat = std::move(yh);
  try {
    res.report = stationarity_report(p, res.x_hat, res.y_hat, true);
  } catch (const Error& e) {
    if (e.code() != Errc::oracle_unavailable) throw;
    res.report = stationarity_report(p, res.x_hat, res.y_hat, false);
  }
  tr.grad_calls = calls + 2;
  tr.final_state = s;
  if (tr.states.back().t != s.t) tr.states.push_back(s);
  tr.audit_ms = audit_ms;
  tr.iterate_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count() - audit_ms;
  return res;
}

// Single-loop run over the generic interface.
inline IterateTrace run(const MinimaxProblem& p, const SolverConfig& k, const IterateState& init,
                        const RunOptions& o = {}) {
  require(k.algorithm != Algorithm::PerturbedSmoothedFoam, Errc::config, "use foam_run for the double-loop method");
  detail::check_run_inputs(p, k, init, o);
  IterateState s = init;
  if (!smooths(k.algorithm)) s.z.resize(0);
  detail::VecKernel kern(p, k, std::move(s));
  return detail::drive(kern, p, k, o);
}

// Same trajectory as run(inst.problem(), ...) bit for bit, for the scalar hard instances.
template <class Inst>
IterateTrace run_scalar(const Inst& inst, const SolverConfig& k, const IterateState& init, const RunOptions& o = {}) {
  require(k.algorithm != Algorithm::PerturbedSmoothedFoam, Errc::config, "use foam_run for the double-loop method");
  const MinimaxProblem p = inst.problem();
  detail::check_run_inputs(p, k, init, o);
  detail::ScalarKernel<Inst> kern(inst, p, k, init);
  return detail::drive(kern, p, k, o);
}

}  // namespace mmx
