#ifndef UNIQCERT_DRIVER_HPP
#define UNIQCERT_DRIVER_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uniqcert/certify.hpp"
#include "uniqcert/config.hpp"
#include "uniqcert/errors.hpp"
#include "uniqcert/laplacian.hpp"
#include "uniqcert/probe.hpp"
#include "uniqcert/report.hpp"
#include "uniqcert/solve.hpp"

namespace uniqcert {

struct RunOptions {
  std::string out_path;
  std::string fields_dir;
  std::optional<std::uint64_t> seed_override;
  bool unsafe = false;
  bool timings = false;
};

struct RunResult {
  nlohmann::json report;
  int exit_code = 0;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    const auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline nlohmann::json base_report(const std::string& command,
                                  const ProblemConfig& cfg) {
  nlohmann::json j;
  j["schema"] = 1;
  j["command"] = command;
  j["config_digest"] = config_digest(cfg);
  return j;
}

inline int certificate_exit(const HypothesisCertificate& cert) {
  return cert.overall == "FAIL" ? 2 : 0;
}

inline void ensure_fields_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

inline std::string field_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline std::optional<double> monitor_floor_for(
    const HypothesisCertificate& cert) {
  const double floor =
      cert.alpha - cert.gamma.value - 1e-8 * cert.alpha;
  if (!std::isfinite(floor)) return std::nullopt;
  return floor;
}

}  // namespace detail

inline RunResult run_certify(const ProblemConfig& cfg,
                             const RunOptions& opts = {}) {
  detail::Stopwatch watch;
  const OperatorBundle ops = prepare_operators(cfg);
  const HypothesisCertificate cert = certify(cfg, ops);
  RunResult res;
  res.report = detail::base_report("certify", cfg);
  res.report["certificate"] = to_json(cert);
  if (opts.timings) res.report["timings_ms"]["certify"] = watch.ms();
  if (!opts.fields_dir.empty()) {
    detail::ensure_fields_dir(opts.fields_dir);
    write_field_csv(detail::field_path(opts.fields_dir, "eigenmode.csv"),
                    ops.ground_mode);
  }
  res.exit_code = detail::certificate_exit(cert);
  return res;
}

inline RunResult run_solve(const ProblemConfig& cfg,
                           const RunOptions& opts = {}) {
  detail::Stopwatch watch;
  const OperatorBundle ops = prepare_operators(cfg);
  const HypothesisCertificate cert = certify(cfg, ops);
  const double certify_ms = watch.ms();

  RunResult res;
  res.report = detail::base_report("solve", cfg);
  res.report["certificate"] = to_json(cert);
  if (cert.overall == "FAIL" && !opts.unsafe) {
    res.report["note"] =
        "solve skipped: certificate verdict is FAIL (rerun with --unsafe to override)";
    if (opts.timings) res.report["timings_ms"]["certify"] = certify_ms;
    res.exit_code = 2;
    return res;
  }

  const Nonlinearity nf = make_nonlinearity(cfg.nonlinearity.f, ops.domain);
  const GridField y = cfg.rhs_field(ops.domain);
  SolveOptions sopts = SolveOptions::from(cfg.solver);
  if (sopts.monitor) sopts.monitor_floor = detail::monitor_floor_for(cert);

  detail::Stopwatch solve_watch;
  const SolveReport rep =
      gauss_newton_solve(ops.A, nf, y, GridField::zeros(ops.domain), sopts);
  res.report["solve"] = to_json(rep);
  if (opts.timings) {
    res.report["timings_ms"]["certify"] = certify_ms;
    res.report["timings_ms"]["solve"] = solve_watch.ms();
  }
  if (!opts.fields_dir.empty()) {
    detail::ensure_fields_dir(opts.fields_dir);
    write_field_csv(detail::field_path(opts.fields_dir, "solution.csv"),
                    rep.solution);
  }
  const int solve_exit = rep.verdict == SolveVerdict::Converged ? 0 : 2;
  res.exit_code = std::max(detail::certificate_exit(cert), solve_exit);
  return res;
}

inline RunResult run_probe(const ProblemConfig& cfg,
                           const RunOptions& opts = {}) {
  detail::Stopwatch watch;
  const OperatorBundle ops = prepare_operators(cfg);
  const HypothesisCertificate cert = certify(cfg, ops);
  const double certify_ms = watch.ms();

  RunResult res;
  res.report = detail::base_report("probe", cfg);
  res.report["certificate"] = to_json(cert);
  if (cert.overall == "FAIL" && !opts.unsafe) {
    res.report["note"] =
        "probe skipped: certificate verdict is FAIL (rerun with --unsafe to override)";
    if (opts.timings) res.report["timings_ms"]["certify"] = certify_ms;
    res.exit_code = 2;
    return res;
  }

  const Nonlinearity nf = make_nonlinearity(cfg.nonlinearity.f, ops.domain);
  const GridField y = cfg.rhs_field(ops.domain);
  SolveOptions sopts = SolveOptions::from(cfg.solver);
  if (sopts.monitor) sopts.monitor_floor = detail::monitor_floor_for(cert);
  ProbeOptions popts;
  popts.starts = cfg.probe.starts;
  popts.seed = opts.seed_override ? *opts.seed_override : cfg.probe.seed;
  popts.amplitude = cfg.probe.amplitude;

  detail::Stopwatch probe_watch;
  const UniquenessReport rep = multistart(ops.A, nf, y, popts, sopts);
  res.report["probe"] = to_json(rep);
  if (opts.timings) {
    res.report["timings_ms"]["certify"] = certify_ms;
    res.report["timings_ms"]["probe"] = probe_watch.ms();
  }
  if (!opts.fields_dir.empty()) {
    detail::ensure_fields_dir(opts.fields_dir);
    for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
      if (!rep.runs[i].converged) continue;
      write_field_csv(
          detail::field_path(opts.fields_dir,
                             "solution_start" + std::to_string(i) + ".csv"),
          rep.solutions[i]);
    }
  }
  const int probe_exit = rep.verdict == "unique-within-tol" ? 0 : 2;
  res.exit_code = std::max(detail::certificate_exit(cert), probe_exit);
  return res;
}

/// Refinement study: interior counts go n -> 2n+1 per axis, so each level
/// halves the spacing exactly; the error against study.exact is measured in
/// the discrete L2 norm and observed orders are log2 ratios.
inline RunResult run_study(const ProblemConfig& cfg,
                           const RunOptions& opts = {}) {
  if (!cfg.study.present || !cfg.study.exact)
    throw ConfigError({"study command requires a study section with an exact solution"});

  detail::Stopwatch watch;
  const OperatorBundle ops = prepare_operators(cfg);
  const HypothesisCertificate cert = certify(cfg, ops);
  const double certify_ms = watch.ms();

  RunResult res;
  res.report = detail::base_report("study", cfg);
  res.report["certificate"] = to_json(cert);
  if (cert.overall == "FAIL" && !opts.unsafe) {
    res.report["note"] =
        "study skipped: certificate verdict is FAIL (rerun with --unsafe to override)";
    if (opts.timings) res.report["timings_ms"]["certify"] = certify_ms;
    res.exit_code = 2;
    return res;
  }

  detail::Stopwatch study_watch;
  StudyReport study;
  study.ok = true;
  std::vector<int> counts(cfg.counts);
  const Expr& exact = *cfg.study.exact;
  if (!opts.fields_dir.empty()) detail::ensure_fields_dir(opts.fields_dir);

  for (int level = 0; level < cfg.study.levels; ++level) {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{0.0, 0.0, 0.0};
    std::array<int, 3> cnt{1, 1, 1};
    for (int k = 0; k < cfg.dimension; ++k) {
      lo[static_cast<std::size_t>(k)] = cfg.bounds[static_cast<std::size_t>(k)][0];
      hi[static_cast<std::size_t>(k)] = cfg.bounds[static_cast<std::size_t>(k)][1];
      cnt[static_cast<std::size_t>(k)] = counts[static_cast<std::size_t>(k)];
    }
    const GridDomain d = GridDomain::box(cfg.dimension, lo, hi, cnt);
    const DiscreteOperator A = build_laplacian(d);
    const Nonlinearity nf = make_nonlinearity(cfg.nonlinearity.f, d);
    const GridField y = cfg.rhs_field(d);
    const SolveOptions sopts = SolveOptions::from(cfg.solver);
    const SolveReport rep =
        gauss_newton_solve(A, nf, y, GridField::zeros(d), sopts);

    const GridField u_exact =
        GridField::from_fn(d, [&](double x, double yy, double zz) {
          return evaluate(exact, Binding::all(x, yy, zz, 0.0));
        });
    const GridField diff = add_scaled(rep.solution, -1.0, u_exact);

    StudyLevel lv;
    lv.dimension = cfg.dimension;
    lv.counts = cnt;
    lv.h_max = 0.0;
    for (int k = 0; k < cfg.dimension; ++k)
      lv.h_max = std::max(lv.h_max, d.spacing[static_cast<std::size_t>(k)]);
    lv.error = norm_h(diff);
    lv.solve_verdict = verdict_name(rep.verdict);
    if (rep.verdict != SolveVerdict::Converged || !std::isfinite(lv.error))
      study.ok = false;
    study.levels.push_back(lv);

    if (!opts.fields_dir.empty())
      write_field_csv(
          detail::field_path(opts.fields_dir,
                             "solution_level" + std::to_string(level) + ".csv"),
          rep.solution);

    for (int k = 0; k < cfg.dimension; ++k) {
      int& c = counts[static_cast<std::size_t>(k)];
      c = 2 * c + 1;
    }
  }
  for (std::size_t l = 0; l + 1 < study.levels.size(); ++l) {
    const double e0 = study.levels[l].error;
    const double e1 = study.levels[l + 1].error;
    study.orders.push_back(std::log2(e0 / e1));
  }
  res.report["study"] = to_json(study);
  if (opts.timings) {
    res.report["timings_ms"]["certify"] = certify_ms;
    res.report["timings_ms"]["study"] = study_watch.ms();
  }
  const int study_exit = study.ok ? 0 : 2;
  res.exit_code = std::max(detail::certificate_exit(cert), study_exit);
  return res;
}

inline RunResult run_command(const std::string& command,
                             const ProblemConfig& cfg,
                             const RunOptions& opts = {}) {
  if (command == "certify") return run_certify(cfg, opts);
  if (command == "solve") return run_solve(cfg, opts);
  if (command == "probe") return run_probe(cfg, opts);
  if (command == "study") return run_study(cfg, opts);
  throw Error("unknown command: " + command);
}

/// Writes the report to out_path when given, otherwise returns it for
/// stdout; the rendered text is identical either way.
inline std::string emit_report(const RunResult& res, const RunOptions& opts) {
  const std::string text = render_report(res.report);
  if (!opts.out_path.empty()) write_text_file(opts.out_path, text);
  return text;
}

}  // namespace uniqcert

#endif  // UNIQCERT_DRIVER_HPP
