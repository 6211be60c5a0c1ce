#include "mmx/harness.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

using namespace mmx;
using nlohmann::json;

namespace {

struct Flags {
  std::string alg = "pgda";
  std::string instance = "gs-hard";
  double ell = 1.0;
  double dy = 1.0;
  std::vector<double> eps;
  std::string mode = "gs";
  std::string init = "eigenvector";
  long max_iters = -1;
  long audit_stride = 0;
  std::string out;
  std::string config;
  int jobs = 1;
  std::uint64_t seed = 0;
  double r_y = 0.1;
  std::vector<std::string> checks;
  std::string which = "lambda1";
  std::string grid = "default";
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--alg", f.alg, "tsgda, pgda, sgda, psgda or foam")
      ->check(CLI::IsMember({"tsgda", "pgda", "sgda", "psgda", "foam"}));
  app->add_option("--instance", f.instance, "gs-hard, os-hard or bilinear-quadratic");
  app->add_option("--ell", f.ell, "smoothness constant");
  app->add_option("--dy", f.dy, "diameter of Y");
  app->add_option("--mode", f.mode, "gs or os")->check(CLI::IsMember({"gs", "os"}));
  app->add_option("--init", f.init, "eigenvector or fixed")->check(CLI::IsMember({"eigenvector", "fixed"}));
  app->add_option("--max-iters", f.max_iters, "iteration cap");
  app->add_option("--audit-stride", f.audit_stride, "stride of audited rows");
  app->add_option("--out", f.out, "output path");
  app->add_option("--config", f.config, "YAML config file");
  app->add_option("--seed", f.seed, "seed for randomized sampling");
  app->add_option("--ry", f.r_y, "r_y of gs-hard when the algorithm has none");
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("mmx");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* lv = std::getenv("MMX_LOG");
  const std::string level = lv ? lv : "error";
  if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else spdlog::set_level(spdlog::level::err);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") std::cout << content;
  else atomic_write(path, content);
}

std::string with_extension(const std::string& path, const char* ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json config_json(const SolverConfig& k) {
  return {{"algorithm", to_string(k.algorithm)}, {"mode", to_string(k.mode)}, {"epsilon", k.epsilon},
          {"c", k.c}, {"alpha", k.alpha}, {"beta", k.beta}, {"r_x", k.r_x}, {"r_y", k.r_y}, {"delta", k.delta},
          {"max_iters", k.max_iters}, {"seed", k.seed}};
}

json report_json(const StationarityReport& r) {
  json j = {{"gs_primal", r.gs_primal}, {"gs_dual", r.gs_dual}, {"gs", r.gs}};
  if (!std::isnan(r.os)) j["os"] = r.os;
  return j;
}

// Shared setup of `run` and `audit`: config, instance, initial state.
struct Prepared {
  SolverConfig cfg;
  AnyInstance inst;
  MinimaxProblem problem;
  IterateState init;
};

Prepared prepare(const Flags& f) {
  require(f.eps.size() == 1, Errc::config, "--eps takes exactly one value here");
  SweepSpec s;
  s.algorithm = parse_algorithm(f.alg);
  s.instance = f.instance;
  s.params = {f.ell, f.dy, f.r_y};
  s.metric = parse_mode(f.mode);
  s.init = parse_init(f.init);
  if (!f.config.empty()) s = parse_sweep_config(read_file(f.config), s);
  const double eps = f.eps.front();
  SolverConfig cfg = select_config(s.algorithm, s.params.ell, s.params.d_y, eps, s.metric);
  cfg.seed = f.seed;
  if (f.max_iters >= 0) cfg.max_iters = f.max_iters;
  Prepared p{cfg, sweep_instance(s.instance, s.params, cfg), MinimaxProblem{}, IterateState{}};
  p.problem = problem_of(p.inst);
  if (s.init == InitMode::Eigenvector && s.instance == "bilinear-quadratic") {
    // No adversarial start exists; use the center of the feasible box.
    p.init.x = p.problem.set_x.project(Vec::Constant(p.problem.dim_x, 0.5));
    p.init.y = Vec::Zero(p.problem.dim_y);
    if (smooths(p.cfg.algorithm)) p.init.z = p.init.x;
  } else {
    p.init = initial_state(s, p.inst, p.cfg, eps);
  }
  return p;
}

int cmd_instances() {
  for (const auto& n : instance_names()) std::cout << n << '\n';
  return 0;
}

int cmd_run(const Flags& f) {
  const Prepared p = prepare(f);
  const bool foam = p.cfg.algorithm == Algorithm::PerturbedSmoothedFoam;
  spdlog::info("run {} on {} eps={}", to_string(p.cfg.algorithm), p.problem.name, p.cfg.epsilon);
  json out;
  out["config"] = config_json(p.cfg);
  out["instance"] = p.problem.name;
  IterateTrace tr;
  if (foam) {
    FoamOptions o;
    o.outer_iters = f.max_iters >= 0 ? f.max_iters : 1000;
    o.metric = p.cfg.mode;
    o.eps = p.cfg.epsilon;
    o.audit_stride = f.audit_stride;
    o.with_psi = f.audit_stride > 0;
    const FoamResult r = foam_run(p.problem, p.cfg, p.init, o);
    tr = r.trace;
    out["t_star"] = r.t_star;
    out["x_hat"] = vec_json(r.x_hat);
    out["y_hat"] = vec_json(r.y_hat);
    out["post_report"] = report_json(r.report);
  } else {
    RunOptions o;
    o.metric = p.cfg.mode;
    o.eps = p.cfg.epsilon;
    o.max_iters = p.cfg.max_iters;
    o.audit_stride = f.audit_stride;
    o.with_psi = f.audit_stride > 0;
    o.record_stride = f.out.empty() ? 0 : 1;
    tr = std::visit(
        [&](const auto& i) -> IterateTrace {
          using I = std::decay_t<decltype(i)>;
          if constexpr (std::is_same_v<I, BilinearQuadratic>) return run(p.problem, p.cfg, p.init, o);
          else return run_scalar(i, p.cfg, p.init, o);
        },
        p.inst);
  }
  out["iterations"] = tr.iterations;
  out["grad_calls"] = tr.grad_calls;
  out["first_hit"] = tr.first_hit ? json(*tr.first_hit) : json(nullptr);
  out["final"] = {{"t", tr.final_state.t}, {"x", vec_json(tr.final_state.x)}, {"y", vec_json(tr.final_state.y)}};
  if (tr.final_state.z.size()) out["final"]["z"] = vec_json(tr.final_state.z);
  out["metadata"] = {{"iterate_ms", tr.iterate_ms}, {"audit_ms", tr.audit_ms}};
  if (!f.out.empty()) {
    atomic_write(f.out, trace_csv(tr, p.problem.dim_x, p.problem.dim_y));
    atomic_write(with_extension(f.out, ".json"), out.dump(2) + "\n");
  } else {
    std::cout << out.dump(2) << '\n';
  }
  return 0;
}

std::vector<AuditKind> default_checks(Algorithm a) {
  switch (a) {
    case Algorithm::PerturbedGda: return {AuditKind::DualErrPGDA, AuditKind::Psi1Descent};
    case Algorithm::PerturbedSmoothedGda: return {AuditKind::DualErrNCSC, AuditKind::Psi2DescentCoupled};
    case Algorithm::PerturbedSmoothedFoam: return {AuditKind::PDescent};
    default: return {AuditKind::GsToOs};
  }
}

int cmd_audit(const Flags& f) {
  const Prepared p = prepare(f);
  std::vector<AuditKind> checks;
  for (const auto& c : f.checks) checks.push_back(parse_audit_kind(c));
  if (checks.empty()) checks = default_checks(p.cfg.algorithm);
  const long iters = f.max_iters >= 0 ? f.max_iters : 1000;
  IterateTrace tr;
  if (p.cfg.algorithm == Algorithm::PerturbedSmoothedFoam) {
    FoamOptions o;
    o.outer_iters = std::max(1L, iters);
    tr = foam_run(p.problem, p.cfg, p.init, o).trace;
  } else {
    RunOptions o;
    o.max_iters = iters;
    tr = run(p.problem, p.cfg, p.init, o);
  }
  const long stride = std::max(1L, f.audit_stride);
  const AuditSummary s = audit_trace(p.problem, tr, checks, stride);
  json out;
  out["config"] = config_json(p.cfg);
  out["instance"] = p.problem.name;
  out["checks"] = json::array();
  for (auto k : checks) out["checks"].push_back(to_string(k));
  out["audited"] = s.audited;
  out["violations"] = json::array();
  for (const auto& v : s.violations) out["violations"].push_back({{"t", v.t}, {"kind", to_string(v.kind)}, {"slack", v.slack}});
  emit(f.out, out.dump(2) + "\n");
  return s.violations.empty() ? 0 : 1;
}

int cmd_sweep(const Flags& f) {
  SweepSpec s;
  s.algorithm = parse_algorithm(f.alg);
  s.instance = f.instance;
  s.params = {f.ell, f.dy, f.r_y};
  s.metric = parse_mode(f.mode);
  s.init = parse_init(f.init);
  s.epsilons = f.eps;
  s.audit_stride = f.audit_stride;
  if (f.max_iters >= 0) s.max_iters = f.max_iters;
  s.jobs = f.jobs;
  if (!f.out.empty()) {
    s.csv_out = f.out;
    s.report_out = with_extension(f.out, ".json");
  }
  if (!f.config.empty()) s = parse_sweep_config(read_file(f.config), s);
  s.validate();
  const std::optional<double> pred = s.predicted_slope ? s.predicted_slope : predicted_slope(s.algorithm, s.metric);
  require(pred.has_value(), Errc::config, "no predicted slope for this algorithm/metric; set fit.predicted_slope");
  const double tol = s.tolerance ? *s.tolerance : default_slope_tolerance(*pred, s.algorithm);
  spdlog::info("sweep {} on {} over {} epsilons", to_string(s.algorithm), s.instance, s.epsilons.size());
  const std::vector<SweepRow> rows = sweep(s);
  for (const auto& r : rows)
    if (r.censored) spdlog::warn("censored point eps={}", r.eps);
  const RateFit fit = slope_fit(rows, *pred, tol);
  const json report = sweep_report(s, rows, fit);
  if (!s.csv_out.empty()) atomic_write(s.csv_out, sweep_csv(rows));
  if (!s.report_out.empty()) atomic_write(s.report_out, report.dump(2) + "\n");
  if (s.csv_out.empty() && s.report_out.empty()) std::cout << report.dump(2) << '\n';
  return fit.pass ? 0 : 1;
}

int cmd_spectral(const Flags& f) {
  static const std::map<std::string, RecursionMatrix> which = {
      {"lambda1", RecursionMatrix::M1}, {"lambda2", RecursionMatrix::M2}, {"lambda3", RecursionMatrix::M3}};
  const RecursionMatrix m = which.at(f.which);
  bool ok = true;
  std::string lines;
  for (const GridPoint& g : spectral_grid(f.grid)) {
    const SpectralReport r = spectral_report(m, g.ell, g.d_y, g.eps);
    const bool pass = r.error.empty() && r.sign_ok && r.rel_dev <= 1e-8;
    ok = ok && pass;
    json j = to_json(r);
    j["pass"] = pass;
    lines += j.dump() + "\n";
  }
  emit(f.out, lines);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"mmx: gradient descent ascent experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* inst = app.add_subcommand("instances", "list registered instances");
  auto* run = app.add_subcommand("run", "run one solver to its first hit");
  add_common(run, f);
  run->add_option("--eps", f.eps, "target accuracy")->required()->expected(1);
  auto* audit = app.add_subcommand("audit", "run a solver and audit its inequalities");
  add_common(audit, f);
  audit->add_option("--eps", f.eps, "target accuracy")->required()->expected(1);
  audit->add_option("--check", f.checks, "audit kind (repeatable)");
  auto* sw = app.add_subcommand("sweep", "first-hit sweep over epsilons with slope fit");
  add_common(sw, f);
  sw->add_option("--eps", f.eps, "epsilon grid (repeatable or space separated)");
  sw->add_option("--jobs", f.jobs, "parallel epsilon points")->check(CLI::PositiveNumber);
  auto* sp = app.add_subcommand("spectral", "closed-form eigenvalues against the numeric spectrum");
  sp->add_option("--which", f.which, "lambda1, lambda2 or lambda3")
      ->check(CLI::IsMember({"lambda1", "lambda2", "lambda3"}));
  sp->add_option("--grid", f.grid, "default or small")->check(CLI::IsMember({"default", "small"}));
  sp->add_option("--out", f.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*inst) return cmd_instances();
    if (*run) return cmd_run(f);
    if (*audit) return cmd_audit(f);
    if (*sw) return cmd_sweep(f);
    if (*sp) return cmd_spectral(f);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    switch (e.code()) {
      case Errc::config:
      case Errc::invalid_argument:
      case Errc::missing_field:
      case Errc::condition_violated:
      case Errc::outside_regime:
      case Errc::oracle_unavailable:
      case Errc::dimension_mismatch:
        return 2;
      default:
        return 1;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 2;
}
