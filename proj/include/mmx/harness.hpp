#pragma once

#include "mmx/solvers.hpp"
#include "mmx/spectral.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace mmx {

using AnyInstance = std::variant<GsHard, OsHard, BilinearQuadratic>;

inline MinimaxProblem problem_of(const AnyInstance& a) {
  return std::visit([](const auto& i) { return i.problem(); }, a);
}

inline AnyInstance make_any_instance(const std::string& name, const InstanceParams& ip) {
  if (name == "gs-hard") return GsHard(ip.ell, ip.d_y, ip.r_y);
  if (name == "os-hard") return OsHard(ip.ell, ip.d_y);
  if (name == "bilinear-quadratic") return default_bilinear(ip.ell, ip.d_y);
  throw Error(Errc::config, "unknown instance '" + name + "'");
}

enum class InitMode { Eigenvector, Fixed, Given };

inline std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::Eigenvector: return "eigenvector";
    case InitMode::Fixed: return "fixed";
    case InitMode::Given: return "given";
  }
  return "?";
}

inline InitMode parse_init(const std::string& s) {
  if (s == "eigenvector") return InitMode::Eigenvector;
  if (s == "fixed") return InitMode::Fixed;
  if (s == "given") return InitMode::Given;
  throw Error(Errc::config, "unknown init '" + s + "'");
}

struct SweepSpec {
  Algorithm algorithm = Algorithm::PerturbedGda;
  std::string instance = "gs-hard";
  InstanceParams params;
  Mode metric = Mode::GS;
  std::vector<double> epsilons;
  InitMode init = InitMode::Eigenvector;
  std::optional<IterateState> given;
  long audit_stride = 0;
  long max_iters = 1000000000;
  int jobs = 1;
  std::string csv_out;
  std::string report_out;
  std::optional<double> predicted_slope;
  std::optional<double> tolerance;

  void validate() const {
    require(epsilons.size() >= 3, Errc::config, "a sweep needs at least 3 epsilons");
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
      require(epsilons[i] > 0.0 && epsilons[i] < 1.0, Errc::config, "epsilons must lie in (0, 1)");
      require(i == 0 || epsilons[i] < epsilons[i - 1], Errc::config, "epsilons must be strictly decreasing");
    }
    require(max_iters >= 0, Errc::config, "max_iters must be non-negative");
    require(jobs >= 1, Errc::config, "jobs must be >= 1");
    require(init != InitMode::Given || given.has_value(), Errc::config, "init 'given' needs a state");
    require(init != InitMode::Fixed || instance == "gs-hard", Errc::config, "fixed init is defined on gs-hard only");
  }
};

struct SweepRow {
  std::string alg, instance, metric;
  double eps = 0.0, r_y = 0.0, c = 0.0, alpha = 0.0, beta = 0.0, delta = 0.0;
  long first_hit_T = 0;
  long grad_calls = 0;
  bool censored = false;
  double wall_ms = 0.0;

  // wall_ms is excluded: it is the one nondeterministic column.
  bool same_result(const SweepRow& o) const {
    return alg == o.alg && instance == o.instance && metric == o.metric && eps == o.eps && r_y == o.r_y &&
           c == o.c && alpha == o.alpha && beta == o.beta && delta == o.delta && first_hit_T == o.first_hit_T &&
           grad_calls == o.grad_calls && censored == o.censored;
  }
  bool operator==(const SweepRow& o) const { return same_result(o) && wall_ms == o.wall_ms; }
};

struct FirstHit {
  long T = 0;
  long grad_calls = 0;
  bool censored = false;
};

// Problem instance for one sweep point; gs-hard is rebuilt with the config's r_y.
inline AnyInstance sweep_instance(const std::string& name, InstanceParams ip, const SolverConfig& k) {
  if (name == "gs-hard" && k.r_y > 0.0) ip.r_y = k.r_y;
  return make_any_instance(name, ip);
}

inline IterateState initial_state(const SweepSpec& s, const AnyInstance& inst, const SolverConfig& k, double eps) {
  switch (s.init) {
    case InitMode::Given: return *s.given;
    case InitMode::Fixed: return fixed_init(std::get<GsHard>(inst), smooths(k.algorithm));
    case InitMode::Eigenvector: {
      const InitKind kind = init_kind_for(k.algorithm, s.metric);
      const bool gs_kind = kind == InitKind::PgdaGS || kind == InitKind::PsgdaGS;
      require(gs_kind ? s.instance == "gs-hard" : s.instance == "os-hard", Errc::config,
              "eigenvector init for " + to_string(kind) + " lives on " + (gs_kind ? "gs-hard" : "os-hard"));
      return eigen_init(kind, s.params.ell, s.params.d_y, eps, k);
    }
  }
  throw Error(Errc::config, "unknown init");
}

// Smallest t whose iterate meets the metric, or the max_iters sentinel when censored.
inline FirstHit first_hit(const AnyInstance& inst, const SolverConfig& k, Mode metric, double eps,
                          const IterateState& init, long max_iters) {
  FirstHit h;
  if (k.algorithm == Algorithm::PerturbedSmoothedFoam) {
    FoamOptions o;
    o.outer_iters = std::max(1L, max_iters);
    o.metric = metric;
    o.eps = eps;
    o.record_stride = 0;
    const FoamResult r = foam_run(problem_of(inst), k, init, o);
    h.censored = !r.trace.first_hit.has_value();
    h.T = h.censored ? max_iters : *r.trace.first_hit;
    h.grad_calls = r.trace.grad_calls;
    return h;
  }
  RunOptions o;
  o.metric = metric;
  o.eps = eps;
  o.max_iters = max_iters;
  o.record_stride = 0;
  const IterateTrace tr = std::visit(
      [&](const auto& i) -> IterateTrace {
        using I = std::decay_t<decltype(i)>;
        if constexpr (std::is_same_v<I, BilinearQuadratic>) return run(i.problem(), k, init, o);
        else return run_scalar(i, k, init, o);
      },
      inst);
  h.censored = !tr.first_hit.has_value();
  h.T = h.censored ? max_iters : *tr.first_hit;
  h.grad_calls = tr.grad_calls;
  return h;
}

inline SweepRow sweep_point(const SweepSpec& s, double eps) {
  const auto start = std::chrono::steady_clock::now();
  const SolverConfig k = select_config(s.algorithm, s.params.ell, s.params.d_y, eps, s.metric);
  const AnyInstance inst = sweep_instance(s.instance, s.params, k);
  const IterateState init = initial_state(s, inst, k, eps);
  const FirstHit h = first_hit(inst, k, s.metric, eps, init, s.max_iters);
  SweepRow r;
  r.alg = to_string(s.algorithm);
  r.instance = s.instance;
  r.metric = to_string(s.metric);
  r.eps = eps;
  r.r_y = k.r_y;
  r.c = k.c;
  r.alpha = k.alpha;
  r.beta = k.beta;
  r.delta = k.delta;
  r.first_hit_T = h.T;
  r.grad_calls = h.grad_calls;
  r.censored = h.censored;
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// One row per epsilon, in epsilon order regardless of which worker finished first.
inline std::vector<SweepRow> sweep(const SweepSpec& s) {
  s.validate();
  std::vector<SweepRow> rows(s.epsilons.size());
  std::vector<std::exception_ptr> errors(s.epsilons.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i] = sweep_point(s, s.epsilons[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(s.jobs, static_cast<int>(rows.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < n; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

// ---------------------------------------------------------------- fitting

struct RateFit {
  std::vector<std::pair<double, double>> points;  // (eps, T), censored points removed
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double predicted_slope = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<std::string> warnings;
};

inline double default_slope_tolerance(double predicted, Algorithm alg) {
  if (alg == Algorithm::PerturbedSmoothedFoam) return 0.3;
  return predicted >= -2.0 ? 0.15 : 0.2;
}

inline std::optional<double> predicted_slope(Algorithm alg, Mode m) {
  switch (alg) {
    case Algorithm::PerturbedGda: return m == Mode::GS ? -2.0 : -4.0;
    case Algorithm::PerturbedSmoothedGda: return m == Mode::GS ? -1.0 : -2.0;
    case Algorithm::SmoothedGda: return m == Mode::OS ? std::optional<double>(-2.0) : std::nullopt;
    default: return std::nullopt;
  }
}

// Ordinary least squares of log T on log eps.
inline RateFit slope_fit(const std::vector<std::pair<double, double>>& points, double predicted, double tolerance,
                         double min_r2 = 0.98) {
  RateFit f;
  f.points = points;
  f.predicted_slope = predicted;
  f.tolerance = tolerance;
  require(points.size() >= 3, Errc::invalid_argument, "slope fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0;
  for (auto [e, t] : points) {
    require(e > 0.0 && t > 0.0, Errc::invalid_argument, "slope fit needs positive eps and T");
    sx += std::log(e);
    sy += std::log(t);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [e, t] : points) {
    const double dx = std::log(e) - mx, dy = std::log(t) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, Errc::invalid_argument, "slope fit needs distinct eps values");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.pass = std::abs(f.slope - predicted) <= tolerance && f.r_squared >= min_r2;
  return f;
}

inline RateFit slope_fit(const std::vector<SweepRow>& rows, double predicted, double tolerance) {
  std::vector<std::pair<double, double>> pts;
  std::vector<std::string> warn;
  for (const auto& r : rows) {
    if (r.censored) {
      std::ostringstream os;
      os << "censored point eps=" << r.eps << " excluded (max_iters " << r.first_hit_T << ")";
      warn.push_back(os.str());
      continue;
    }
    pts.emplace_back(r.eps, static_cast<double>(r.first_hit_T));
  }
  RateFit f = slope_fit(pts, predicted, tolerance);
  f.warnings = std::move(warn);
  return f;
}

// ---------------------------------------------------------------- audits

struct Violation {
  long t = 0;
  AuditKind kind = AuditKind::GsToOs;
  double slack = 0.0;
};

struct AuditSummary {
  std::vector<Violation> violations;
  long audited = 0;  // number of (t, kind) checks performed
};

// Runs each check at every audit_stride-th t whose neighbouring states are recorded.
inline AuditSummary audit_trace(const MinimaxProblem& p, const IterateTrace& tr, const std::vector<AuditKind>& checks,
                                long audit_stride = 1, double rel_tol = 1e-7) {
  AuditSummary out;
  if (tr.states.empty()) return out;
  require(audit_stride >= 1, Errc::invalid_argument, "audit_stride must be >= 1");
  std::map<long, const IterateState*> at;
  for (const auto& s : tr.states) at[s.t] = &s;
  auto get = [&](long t) -> const IterateState* {
    auto it = at.find(t);
    return it == at.end() ? nullptr : it->second;
  };
  for (const auto& [t, cur] : at) {
    if (t % audit_stride != 0) continue;
    const IterateState* prev = get(t - 1);
    const IterateState* next = get(t + 1);
    for (AuditKind kind : checks) {
      AuditContext c;
      c.problem = &p;
      c.cfg = tr.config;
      c.x = cur->x;
      c.y = cur->y;
      if (cur->z.size()) c.z = cur->z;
      bool needs_prev = kind == AuditKind::DualErrPGDA || kind == AuditKind::Psi1Descent;
      bool needs_next = kind == AuditKind::Psi1Descent || kind == AuditKind::Psi2Descent ||
                        kind == AuditKind::Psi2DescentCoupled || kind == AuditKind::PDescent;
      // The t = 0 estimate is separate for Psi1; the audit starts at t = 1.
      if (needs_prev && (!prev || t < 1)) continue;
      if (needs_next && !next) continue;
      if (prev) {
        c.x_prev = prev->x;
        c.y_prev = prev->y;
      }
      if (next) {
        c.x_next = next->x;
        c.y_next = next->y;
        if (next->z.size()) c.z_next = next->z;
      }
      const AuditResult a = bound_audit(kind, c);
      ++out.audited;
      if (!a.holds(rel_tol)) out.violations.push_back({t, kind, a.slack});
    }
  }
  return out;
}

// ---------------------------------------------------------------- persistence

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  require(r.ec == std::errc() && r.ptr == s.data() + s.size(), Errc::io, "bad number '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s) {
  long v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  require(r.ec == std::errc() && r.ptr == s.data() + s.size(), Errc::io, "bad integer '" + s + "'");
  return v;
}

// Writes to a sibling temporary and renames it over path.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw Error(Errc::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::io, "cannot rename onto " + path);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline const char* kSweepHeader =
    "alg,instance,metric,eps,r_y,c,alpha,beta,delta,first_hit_T,grad_calls,censored,wall_ms";

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << r.alg << ',' << r.instance << ',' << r.metric << ',' << fmt_double(r.eps) << ',' << fmt_double(r.r_y) << ','
       << fmt_double(r.c) << ',' << fmt_double(r.alpha) << ',' << fmt_double(r.beta) << ',' << fmt_double(r.delta)
       << ',' << r.first_hit_T << ',' << r.grad_calls << ',' << (r.censored ? 1 : 0) << ',' << fmt_double(r.wall_ms)
       << '\n';
  }
  return os.str();
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace detail

inline std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::io, "empty sweep CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == kSweepHeader, Errc::io, "sweep CSV header mismatch");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    require(f.size() == 13, Errc::io, "sweep CSV row has " + std::to_string(f.size()) + " fields, expected 13");
    SweepRow r;
    r.alg = f[0];
    r.instance = f[1];
    r.metric = f[2];
    r.eps = parse_double(f[3]);
    r.r_y = parse_double(f[4]);
    r.c = parse_double(f[5]);
    r.alpha = parse_double(f[6]);
    r.beta = parse_double(f[7]);
    r.delta = parse_double(f[8]);
    r.first_hit_T = parse_long(f[9]);
    r.grad_calls = parse_long(f[10]);
    r.censored = parse_long(f[11]) != 0;
    r.wall_ms = parse_double(f[12]);
    rows.push_back(r);
  }
  return rows;
}

// Re-derives the row's config and checks it against its Condition.
inline void revalidate_row(const SweepRow& r, double ell, double d_y) {
  SolverConfig k;
  k.algorithm = parse_algorithm(r.alg);
  k.mode = parse_mode(r.metric);
  const SolverConfig ref = select_config(k.algorithm, ell, d_y, r.eps, k.mode);
  k = ref;
  k.r_y = r.r_y;
  k.c = r.c;
  k.alpha = r.alpha;
  k.beta = r.beta;
  k.delta = r.delta;
  validate_config(k);
}

inline std::string trace_csv(const IterateTrace& tr, Index dim_x, Index dim_y) {
  std::ostringstream os;
  const bool has_z = smooths(tr.config.algorithm);
  os << 't';
  for (Index i = 0; i < dim_x; ++i) os << ",x" << i;
  for (Index i = 0; i < dim_y; ++i) os << ",y" << i;
  if (has_z)
    for (Index i = 0; i < dim_x; ++i) os << ",z" << i;
  os << ",step_x,step_y,gs_primal,gs_dual,os,psi\n";
  std::map<long, const AuditRow*> audits;
  for (const auto& a : tr.audits) audits[a.t] = &a;
  for (const auto& s : tr.states) {
    os << s.t;
    for (Index i = 0; i < dim_x; ++i) os << ',' << fmt_double(s.x[i]);
    for (Index i = 0; i < dim_y; ++i) os << ',' << fmt_double(s.y[i]);
    if (has_z)
      for (Index i = 0; i < dim_x; ++i) os << ',' << fmt_double(s.z[i]);
    os << ',' << fmt_double(s.last_step_x) << ',' << fmt_double(s.last_step_y);
    auto it = audits.find(s.t);
    if (it != audits.end()) {
      const AuditRow& a = *it->second;
      os << ',' << fmt_double(a.report.gs_primal) << ',' << fmt_double(a.report.gs_dual) << ','
         << (std::isnan(a.report.os) ? std::string() : fmt_double(a.report.os)) << ','
         << (a.psi ? fmt_double(*a.psi) : std::string());
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
  return os.str();
}

struct TraceTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

inline TraceTable parse_trace_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::io, "empty trace CSV");
  TraceTable t;
  t.columns = detail::split_csv(line);
  require(!t.columns.empty() && t.columns.front() == "t", Errc::io, "trace CSV must start with column t");
  const std::vector<std::string> tail = {"step_x", "step_y", "gs_primal", "gs_dual", "os", "psi"};
  require(t.columns.size() >= tail.size() + 1 &&
              std::equal(tail.begin(), tail.end(), t.columns.end() - static_cast<long>(tail.size())),
          Errc::io, "trace CSV columns do not end with step_x,step_y,gs_primal,gs_dual,os,psi");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    require(f.size() == t.columns.size(), Errc::io, "trace CSV row width mismatch");
    std::vector<std::optional<double>> row;
    for (const auto& s : f) row.push_back(s.empty() ? std::nullopt : std::optional<double>(parse_double(s)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline nlohmann::json to_json(const SweepSpec& s) {
  nlohmann::json j;
  j["algorithm"] = to_string(s.algorithm);
  j["instance"] = {{"name", s.instance}, {"ell", s.params.ell}, {"d_y", s.params.d_y}, {"r_y", s.params.r_y}};
  j["metric"] = to_string(s.metric);
  j["epsilons"] = s.epsilons;
  j["init"] = to_string(s.init);
  j["audit_stride"] = s.audit_stride;
  j["max_iters"] = s.max_iters;
  return j;
}

inline nlohmann::json to_json(const SweepRow& r) {
  return {{"alg", r.alg},         {"instance", r.instance},       {"metric", r.metric},
          {"eps", r.eps},         {"r_y", r.r_y},                 {"c", r.c},
          {"alpha", r.alpha},     {"beta", r.beta},               {"delta", r.delta},
          {"first_hit_T", r.first_hit_T}, {"grad_calls", r.grad_calls}, {"censored", r.censored}};
}

// Report body is deterministic; the timestamp and wall clock live under "metadata".
inline nlohmann::json sweep_report(const SweepSpec& s, const std::vector<SweepRow>& rows, const RateFit& f) {
  nlohmann::json j;
  j["spec"] = to_json(s);
  j["points"] = nlohmann::json::array();
  for (const auto& r : rows) j["points"].push_back(to_json(r));
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["r2"] = f.r_squared;
  j["predicted_slope"] = f.predicted_slope;
  j["pass"] = f.pass;
  j["warnings"] = f.warnings;
  double wall = 0.0;
  for (const auto& r : rows) wall += r.wall_ms;
  char ts[32];
  const std::time_t now = std::time(nullptr);
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["metadata"] = {{"timestamp", ts}, {"wall_ms", wall}};
  return j;
}

// ---------------------------------------------------------------- config file

namespace detail {

inline void reject_unknown(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& where) {
  require(n.IsMap(), Errc::config, where + " must be a mapping");
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, Errc::config, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T yaml_get(const YAML::Node& n, const std::string& key) {
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw Error(Errc::config, "bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

// Nested YAML mirroring SweepSpec. Keys absent from the file leave `base` untouched.
inline SweepSpec parse_sweep_config(const std::string& text, SweepSpec base = {}) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::config, std::string("config parse error: ") + e.what());
  }
  if (root.IsNull()) return base;
  using detail::yaml_get;
  detail::reject_unknown(root,
                         {"algorithm", "instance", "metric", "epsilons", "init", "audit_stride", "max_iters", "jobs",
                          "output", "fit"},
                         "config");
  SweepSpec s = std::move(base);
  if (root["algorithm"]) s.algorithm = parse_algorithm(yaml_get<std::string>(root, "algorithm"));
  if (root["metric"]) s.metric = parse_mode(yaml_get<std::string>(root, "metric"));
  if (root["init"]) s.init = parse_init(yaml_get<std::string>(root, "init"));
  if (root["epsilons"]) s.epsilons = yaml_get<std::vector<double>>(root, "epsilons");
  if (root["audit_stride"]) s.audit_stride = yaml_get<long>(root, "audit_stride");
  if (root["max_iters"]) s.max_iters = yaml_get<long>(root, "max_iters");
  if (root["jobs"]) s.jobs = yaml_get<int>(root, "jobs");
  if (const YAML::Node in = root["instance"]) {
    detail::reject_unknown(in, {"name", "ell", "d_y", "r_y"}, "instance");
    if (in["name"]) s.instance = yaml_get<std::string>(in, "name");
    if (in["ell"]) s.params.ell = yaml_get<double>(in, "ell");
    if (in["d_y"]) s.params.d_y = yaml_get<double>(in, "d_y");
    if (in["r_y"]) s.params.r_y = yaml_get<double>(in, "r_y");
  }
  if (const YAML::Node out = root["output"]) {
    detail::reject_unknown(out, {"csv", "report"}, "output");
    if (out["csv"]) s.csv_out = yaml_get<std::string>(out, "csv");
    if (out["report"]) s.report_out = yaml_get<std::string>(out, "report");
  }
  if (const YAML::Node fit = root["fit"]) {
    detail::reject_unknown(fit, {"predicted_slope", "tolerance"}, "fit");
    if (fit["predicted_slope"]) s.predicted_slope = yaml_get<double>(fit, "predicted_slope");
    if (fit["tolerance"]) s.tolerance = yaml_get<double>(fit, "tolerance");
  }
  return s;
}

// ---------------------------------------------------------------- spectral grid

struct GridPoint {
  double ell, d_y, eps;
};

// 100 points: ell in {0.5,1,2,4}, D in {0.5,1,2,4,8}, eps in 2^{-3,-5,-7,-9,-11}.
inline std::vector<GridPoint> spectral_grid(const std::string& name) {
  std::vector<GridPoint> g;
  if (name == "default") {
    for (double l : {0.5, 1.0, 2.0, 4.0})
      for (double d : {0.5, 1.0, 2.0, 4.0, 8.0})
        for (int k : {3, 5, 7, 9, 11}) g.push_back({l, d, std::ldexp(1.0, -k)});
    return g;
  }
  if (name == "small") {
    for (int k = 3; k <= 9; ++k) g.push_back({1.0, 1.0, std::ldexp(1.0, -k)});
    return g;
  }
  throw Error(Errc::config, "unknown grid '" + name + "'");
}

inline nlohmann::json to_json(const SpectralReport& r) {
  nlohmann::json j;
  j["matrix"] = to_string(r.which);
  j["ell"] = r.ell;
  j["d_y"] = r.d_y;
  j["epsilon"] = r.epsilon;
  j["numeric"] = nlohmann::json::array();
  for (const auto& z : r.numeric) j["numeric"].push_back({z.real(), z.imag()});
  j["closed"] = r.closed;
  j["nearest"] = r.nearest;
  j["abs_dev"] = r.abs_dev;
  j["rel_dev"] = r.rel_dev;
  j["sign_ok"] = r.sign_ok;
  j["theta_ratio"] = r.theta_ratio;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

}  // namespace mmx
