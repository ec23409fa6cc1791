#ifndef UNIQCERT_CONFIG_HPP
#define UNIQCERT_CONFIG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uniqcert/errors.hpp"
#include "uniqcert/expr.hpp"
#include "uniqcert/grid.hpp"

namespace uniqcert {

struct GrowthConfig {
  enum class Mode { Asserted, Sampled };
  enum class Route { Embedding, Spectral };
  Mode mode = Mode::Sampled;
  Route route = Route::Spectral;
  std::string a1_text;
  std::string b1_text;
  std::optional<Expr> a1;
  std::optional<Expr> b1;
};

struct NonlinearityConfig {
  std::string f_text;
  Expr f;
  Expr fu;
  std::array<double, 2> u_range{-1.0, 1.0};
  int u_samples = 101;
  std::optional<double> asserted_b3;
  GrowthConfig growth;
};

struct SolverConfig {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double cg_tolerance = 1e-12;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
  bool monitor = true;
};

struct ProbeConfig {
  int starts = 10;
  std::uint64_t seed = 42;
  double amplitude = 50.0;
};

struct CertificateConfig {
  /// Relative margin: N2 passes need gamma <= alpha*(1 - margin) and
  /// beta <= 1 - margin.
  double margin = 1e-9;
  bool embedding_all = true;
  int embedding_stride = 4;
};

struct StudyConfig {
  bool present = false;
  int levels = 3;
  std::string exact_text;
  std::optional<Expr> exact;
};

struct ProblemConfig {
  int schema = 1;
  int dimension = 1;
  std::vector<std::array<double, 2>> bounds;
  std::vector<int> counts;
  std::string rhs_text = "zero";
  std::optional<Expr> rhs;
  NonlinearityConfig nonlinearity;
  SolverConfig solver;
  ProbeConfig probe;
  CertificateConfig certificate;
  StudyConfig study;

  GridDomain domain() const {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{0.0, 0.0, 0.0};
    std::array<int, 3> cnt{1, 1, 1};
    for (int k = 0; k < dimension; ++k) {
      lo[static_cast<std::size_t>(k)] = bounds[static_cast<std::size_t>(k)][0];
      hi[static_cast<std::size_t>(k)] = bounds[static_cast<std::size_t>(k)][1];
      cnt[static_cast<std::size_t>(k)] = counts[static_cast<std::size_t>(k)];
    }
    return GridDomain::box(dimension, lo, hi, cnt);
  }

  GridField rhs_field(const GridDomain& d) const {
    if (!rhs) return GridField::zeros(d);
    const Expr& e = *rhs;
    return GridField::from_fn(d, [&](double x, double y, double z) {
      return evaluate(e, Binding::all(x, y, z, 0.0));
    });
  }

  std::vector<double> u_sample_grid() const {
    const double lo = nonlinearity.u_range[0];
    const double hi = nonlinearity.u_range[1];
    const int ns = nonlinearity.u_samples;
    std::vector<double> out(static_cast<std::size_t>(ns));
    for (int j = 0; j < ns; ++j)
      out[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / (ns - 1);
    return out;
  }
};

namespace detail {

struct Issues {
  std::vector<std::string> list;
  void add(std::string msg) { list.push_back(std::move(msg)); }
  bool empty() const { return list.empty(); }
};

inline bool get_finite_double(const nlohmann::json& j, const char* key,
                              double& out, Issues& issues,
                              const std::string& where) {
  if (!j.contains(key)) return false;
  const auto& v = j.at(key);
  if (!v.is_number()) {
    issues.add(where + "." + key + " must be a number");
    return false;
  }
  out = v.get<double>();
  if (!std::isfinite(out)) {
    issues.add(where + "." + key + " must be finite");
    return false;
  }
  return true;
}

inline bool get_int(const nlohmann::json& j, const char* key, int& out,
                    Issues& issues, const std::string& where) {
  if (!j.contains(key)) return false;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    issues.add(where + "." + key + " must be an integer");
    return false;
  }
  out = v.get<int>();
  return true;
}

inline std::optional<Expr> parse_checked(const std::string& text,
                                         const std::string& label,
                                         Issues& issues) {
  try {
    return parse(text);
  } catch (const ParseError& err) {
    issues.add(label + ": " + err.what());
    return std::nullopt;
  }
}

/// Expression text or plain number, evaluated to a variable-free constant.
inline std::optional<double> constant_of(const nlohmann::json& v,
                                         const std::string& label,
                                         Issues& issues) {
  if (v.is_number()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      issues.add(label + " must be finite");
      return std::nullopt;
    }
    return x;
  }
  if (!v.is_string()) {
    issues.add(label + " must be a number or an expression string");
    return std::nullopt;
  }
  const auto e = parse_checked(v.get<std::string>(), label, issues);
  if (!e) return std::nullopt;
  for (int var = 0; var < 4; ++var) {
    if (uses_variable(*e, var)) {
      issues.add(label + " must be a constant expression (found '" +
                 std::string(1, variable_name(var)) + "')");
      return std::nullopt;
    }
  }
  try {
    return evaluate(*e, Binding{});
  } catch (const EvalError& err) {
    issues.add(label + ": " + err.what());
    return std::nullopt;
  }
}

inline void check_variables(const Expr& e, int dimension, bool allow_u,
                            const std::string& label, Issues& issues) {
  for (int var = 0; var < 3; ++var) {
    if (var >= dimension && uses_variable(e, var))
      issues.add(label + " references '" + std::string(1, variable_name(var)) +
                 "' but the domain dimension is " + std::to_string(dimension));
  }
  if (!allow_u && uses_variable(e, kVarU))
    issues.add(label + " must not reference 'u'");
}

/// Dense closed-box lattice, endpoints included, for singularity scans.
inline std::vector<std::array<double, 3>> scan_lattice(
    const ProblemConfig& cfg) {
  const int per_axis = cfg.dimension >= 3 ? 17 : 33;
  std::array<std::vector<double>, 3> axis;
  for (int k = 0; k < 3; ++k) {
    if (k < cfg.dimension) {
      const double lo = cfg.bounds[static_cast<std::size_t>(k)][0];
      const double hi = cfg.bounds[static_cast<std::size_t>(k)][1];
      for (int i = 0; i < per_axis; ++i)
        axis[static_cast<std::size_t>(k)].push_back(
            lo + (hi - lo) * i / (per_axis - 1));
    } else {
      axis[static_cast<std::size_t>(k)].push_back(0.0);
    }
  }
  std::vector<std::array<double, 3>> pts;
  for (double z : axis[2])
    for (double y : axis[1])
      for (double x : axis[0]) pts.push_back({x, y, z});
  return pts;
}

struct RangeScan {
  double min = 0.0;
  double max = 0.0;
  bool ok = false;
};

/// Range of a subexpression over lattice x u-samples. Evaluation failures
/// leave ok=false; the failing inner node reports its own issue.
inline RangeScan scan_range(const Expr& e,
                            const std::vector<std::array<double, 3>>& pts,
                            const std::vector<double>& u_values) {
  RangeScan r;
  const bool needs_u = uses_variable(e, kVarU);
  const std::vector<double> us = needs_u ? u_values : std::vector<double>{0.0};
  bool first = true;
  try {
    for (const auto& p : pts) {
      for (double u : us) {
        const double v = evaluate(e, Binding::all(p[0], p[1], p[2], u));
        if (first) {
          r.min = r.max = v;
          first = false;
        } else {
          r.min = std::min(r.min, v);
          r.max = std::max(r.max, v);
        }
      }
    }
  } catch (const EvalError&) {
    return r;
  }
  r.ok = !first;
  return r;
}

inline void scan_singularities(const Expr& e,
                               const std::vector<std::array<double, 3>>& pts,
                               const std::vector<double>& u_values,
                               const std::string& label, Issues& issues) {
  constexpr double kVanish = 1e-9;
  for_each_node(e, [&](const Expr& node) {
    if (node.kind == ExprKind::Binary && node.op == ExprOp::Div) {
      const RangeScan r = scan_range(node.kids[1], pts, u_values);
      if (r.ok && (std::min(std::abs(r.min), std::abs(r.max)) < kVanish ||
                   (r.min < 0.0 && r.max > 0.0)))
        issues.add(label + ": denominator '" + print(node.kids[1]) +
                   "' can vanish on the domain");
    } else if (node.kind == ExprKind::Call && node.func == ExprFunc::Log) {
      const RangeScan r = scan_range(node.kids[0], pts, u_values);
      if (r.ok && r.min <= 0.0)
        issues.add(label + ": log argument '" + print(node.kids[0]) +
                   "' is not positive on the whole domain");
    } else if (node.kind == ExprKind::Call && node.func == ExprFunc::Sqrt) {
      const RangeScan r = scan_range(node.kids[0], pts, u_values);
      if (r.ok && r.min < 0.0)
        issues.add(label + ": sqrt argument '" + print(node.kids[0]) +
                   "' is negative somewhere on the domain");
    } else if (node.kind == ExprKind::Binary && node.op == ExprOp::Pow) {
      const Expr& base = node.kids[0];
      const Expr& expo = node.kids[1];
      if (expo.kind == ExprKind::Constant) {
        const double c = expo.value;
        const bool integral = c == std::floor(c) && std::abs(c) <= 64.0;
        if (!integral) {
          const RangeScan r = scan_range(base, pts, u_values);
          if (r.ok && r.min < 0.0)
            issues.add(label + ": fractional power base '" + print(base) +
                       "' is negative somewhere on the domain");
        } else if (c < 0.0) {
          const RangeScan r = scan_range(base, pts, u_values);
          if (r.ok && (std::min(std::abs(r.min), std::abs(r.max)) < kVanish ||
                       (r.min < 0.0 && r.max > 0.0)))
            issues.add(label + ": base of negative power '" + print(base) +
                       "' can vanish on the domain");
        }
      } else {
        const RangeScan r = scan_range(base, pts, u_values);
        if (r.ok && r.min < 0.0)
          issues.add(label + ": base of non-constant power '" + print(base) +
                     "' must stay non-negative on the domain");
      }
    }
  });
}

inline void trial_evaluate(const Expr& e,
                           const std::vector<std::array<double, 3>>& pts,
                           const std::vector<double>& u_values,
                           const std::string& label, Issues& issues) {
  const bool needs_u = uses_variable(e, kVarU);
  const std::vector<double> us = needs_u ? u_values : std::vector<double>{0.0};
  try {
    for (const auto& p : pts)
      for (double u : us) evaluate(e, Binding::all(p[0], p[1], p[2], u));
  } catch (const EvalError& err) {
    issues.add(label + ": evaluation failed on the domain (" + err.what() +
               ")");
  }
}

}  // namespace detail

inline ProblemConfig load_config_json(const nlohmann::json& j) {
  using detail::Issues;
  Issues issues;
  ProblemConfig cfg;

  if (!j.is_object()) {
    issues.add("top level must be a JSON object");
    throw ConfigError(issues.list);
  }

  if (j.contains("schema")) {
    if (!j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1)
      issues.add("schema must be the integer 1");
  }

  // --- domain ---------------------------------------------------------
  if (!j.contains("domain") || !j.at("domain").is_object()) {
    issues.add("domain section is required");
  } else {
    const auto& dj = j.at("domain");
    if (!detail::get_int(dj, "dimension", cfg.dimension, issues, "domain"))
      issues.add("domain.dimension is required");
    if (cfg.dimension < 1 || cfg.dimension > 3)
      issues.add("domain.dimension must be 1, 2, or 3");
    if (!dj.contains("bounds") || !dj.at("bounds").is_array()) {
      issues.add("domain.bounds must be an array of [lower, upper] pairs");
    } else {
      for (const auto& b : dj.at("bounds")) {
        if (!b.is_array() || b.size() != 2 || !b.at(0).is_number() ||
            !b.at(1).is_number()) {
          issues.add("domain.bounds entries must be [lower, upper] numbers");
          continue;
        }
        cfg.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
      }
    }
    if (!dj.contains("counts") || !dj.at("counts").is_array()) {
      issues.add("domain.counts must be an array of interior node counts");
    } else {
      for (const auto& c : dj.at("counts")) {
        if (!c.is_number_integer()) {
          issues.add("domain.counts entries must be integers");
          continue;
        }
        cfg.counts.push_back(c.get<int>());
      }
    }
    if (cfg.dimension >= 1 && cfg.dimension <= 3) {
      if (cfg.bounds.size() != static_cast<std::size_t>(cfg.dimension))
        issues.add("domain.bounds must list exactly one pair per dimension (got " +
                   std::to_string(cfg.bounds.size()) + " for dimension " +
                   std::to_string(cfg.dimension) + ")");
      if (cfg.counts.size() != static_cast<std::size_t>(cfg.dimension))
        issues.add("domain.counts must list exactly one count per dimension (got " +
                   std::to_string(cfg.counts.size()) + " for dimension " +
                   std::to_string(cfg.dimension) + ")");
    }
    for (std::size_t k = 0; k < cfg.bounds.size(); ++k) {
      if (!(std::isfinite(cfg.bounds[k][0]) && std::isfinite(cfg.bounds[k][1]) &&
            cfg.bounds[k][0] < cfg.bounds[k][1]))
        issues.add("domain.bounds[" + std::to_string(k) +
                   "] must be finite with lower < upper");
    }
    for (std::size_t k = 0; k < cfg.counts.size(); ++k) {
      if (cfg.counts[k] < 1)
        issues.add("domain.counts[" + std::to_string(k) +
                   "] must be at least 1");
    }
  }

  // --- nonlinearity ---------------------------------------------------
  std::optional<Expr> f_parsed;
  if (!j.contains("nonlinearity") || !j.at("nonlinearity").is_object()) {
    issues.add("nonlinearity section is required");
  } else {
    const auto& nj = j.at("nonlinearity");
    if (!nj.contains("f") || !nj.at("f").is_string()) {
      issues.add("nonlinearity.f must be an expression string");
    } else {
      cfg.nonlinearity.f_text = nj.at("f").get<std::string>();
      f_parsed = detail::parse_checked(cfg.nonlinearity.f_text,
                                       "nonlinearity.f", issues);
    }
    if (nj.contains("u_range")) {
      const auto& r = nj.at("u_range");
      if (!r.is_array() || r.size() != 2 || !r.at(0).is_number() ||
          !r.at(1).is_number()) {
        issues.add("nonlinearity.u_range must be [lower, upper]");
      } else {
        cfg.nonlinearity.u_range = {r.at(0).get<double>(),
                                    r.at(1).get<double>()};
      }
    }
    if (!(std::isfinite(cfg.nonlinearity.u_range[0]) &&
          std::isfinite(cfg.nonlinearity.u_range[1]) &&
          cfg.nonlinearity.u_range[0] < cfg.nonlinearity.u_range[1]))
      issues.add("nonlinearity.u_range must be a nonempty finite interval");
    detail::get_int(nj, "u_samples", cfg.nonlinearity.u_samples, issues,
                    "nonlinearity");
    if (cfg.nonlinearity.u_samples < 2)
      issues.add("nonlinearity.u_samples must be at least 2");
    if (nj.contains("asserted_b3"))
      cfg.nonlinearity.asserted_b3 =
          detail::constant_of(nj.at("asserted_b3"), "nonlinearity.asserted_b3",
                              issues);
    if (nj.contains("growth")) {
      const auto& gj = nj.at("growth");
      if (!gj.is_object()) {
        issues.add("nonlinearity.growth must be an object");
      } else {
        GrowthConfig& g = cfg.nonlinearity.growth;
        const std::string mode = gj.value("mode", std::string("sampled"));
        if (mode == "asserted") g.mode = GrowthConfig::Mode::Asserted;
        else if (mode == "sampled") g.mode = GrowthConfig::Mode::Sampled;
        else issues.add("nonlinearity.growth.mode must be 'asserted' or 'sampled'");
        const std::string route = gj.value("route", std::string("spectral"));
        if (route == "embedding") g.route = GrowthConfig::Route::Embedding;
        else if (route == "spectral") g.route = GrowthConfig::Route::Spectral;
        else issues.add("nonlinearity.growth.route must be 'embedding' or 'spectral'");
        if (g.mode == GrowthConfig::Mode::Asserted) {
          if (!gj.contains("a1") || !gj.at("a1").is_string())
            issues.add("nonlinearity.growth.a1 is required (expression string) in asserted mode");
          else {
            g.a1_text = gj.at("a1").get<std::string>();
            g.a1 = detail::parse_checked(g.a1_text, "nonlinearity.growth.a1",
                                         issues);
          }
          if (!gj.contains("b1") || !gj.at("b1").is_string())
            issues.add("nonlinearity.growth.b1 is required (expression string) in asserted mode");
          else {
            g.b1_text = gj.at("b1").get<std::string>();
            g.b1 = detail::parse_checked(g.b1_text, "nonlinearity.growth.b1",
                                         issues);
          }
        }
      }
    }
  }

  // --- rhs --------------------------------------------------------------
  if (j.contains("rhs")) {
    if (!j.at("rhs").is_string()) {
      issues.add("rhs must be 'zero' or an expression string");
    } else {
      cfg.rhs_text = j.at("rhs").get<std::string>();
    }
  }
  if (cfg.rhs_text != "zero")
    cfg.rhs = detail::parse_checked(cfg.rhs_text, "rhs", issues);

  // --- solver -----------------------------------------------------------
  if (j.contains("solver")) {
    const auto& sj = j.at("solver");
    SolverConfig& s = cfg.solver;
    detail::get_finite_double(sj, "tolerance", s.tolerance, issues, "solver");
    detail::get_int(sj, "max_iterations", s.max_iterations, issues, "solver");
    detail::get_finite_double(sj, "cg_tolerance", s.cg_tolerance, issues,
                              "solver");
    detail::get_finite_double(sj, "armijo_c1", s.armijo_c1, issues, "solver");
    detail::get_finite_double(sj, "backtrack", s.backtrack, issues, "solver");
    detail::get_finite_double(sj, "min_step", s.min_step, issues, "solver");
    if (sj.contains("monitor")) {
      if (sj.at("monitor").is_boolean())
        s.monitor = sj.at("monitor").get<bool>();
      else
        issues.add("solver.monitor must be a boolean");
    }
  }
  if (!(cfg.solver.tolerance > 0.0 && cfg.solver.tolerance < 1.0))
    issues.add("solver.tolerance must lie in (0, 1)");
  if (cfg.solver.max_iterations < 1)
    issues.add("solver.max_iterations must be at least 1");
  if (!(cfg.solver.cg_tolerance > 0.0 && cfg.solver.cg_tolerance < 1.0))
    issues.add("solver.cg_tolerance must lie in (0, 1)");
  if (!(cfg.solver.armijo_c1 > 0.0 && cfg.solver.armijo_c1 < 1.0))
    issues.add("solver.armijo_c1 must lie in (0, 1)");
  if (!(cfg.solver.backtrack > 0.0 && cfg.solver.backtrack < 1.0))
    issues.add("solver.backtrack must lie in (0, 1)");
  if (!(cfg.solver.min_step > 0.0))
    issues.add("solver.min_step must be positive");

  // --- probe ------------------------------------------------------------
  if (j.contains("probe")) {
    const auto& pj = j.at("probe");
    detail::get_int(pj, "starts", cfg.probe.starts, issues, "probe");
    if (pj.contains("seed")) {
      if (pj.at("seed").is_number_unsigned() ||
          pj.at("seed").is_number_integer())
        cfg.probe.seed = pj.at("seed").get<std::uint64_t>();
      else
        issues.add("probe.seed must be a non-negative integer");
    }
    detail::get_finite_double(pj, "amplitude", cfg.probe.amplitude, issues,
                              "probe");
  }
  if (cfg.probe.starts < 2) issues.add("probe.starts must be at least 2");
  if (!(cfg.probe.amplitude > 0.0))
    issues.add("probe.amplitude must be positive");

  // --- certificate --------------------------------------------------------
  if (j.contains("certificate")) {
    const auto& cj = j.at("certificate");
    detail::get_finite_double(cj, "margin", cfg.certificate.margin, issues,
                              "certificate");
    if (cj.contains("embedding_sample")) {
      const auto& es = cj.at("embedding_sample");
      if (es.is_string() && es.get<std::string>() == "all") {
        cfg.certificate.embedding_all = true;
      } else if (es.is_number_integer() && es.get<int>() >= 1) {
        cfg.certificate.embedding_all = false;
        cfg.certificate.embedding_stride = es.get<int>();
      } else {
        issues.add("certificate.embedding_sample must be 'all' or a positive integer stride");
      }
    }
  }
  if (!(cfg.certificate.margin >= 0.0 && cfg.certificate.margin < 1.0))
    issues.add("certificate.margin must lie in [0, 1)");

  // --- study --------------------------------------------------------------
  if (j.contains("study")) {
    const auto& tj = j.at("study");
    if (!tj.is_object()) {
      issues.add("study must be an object");
    } else {
      cfg.study.present = true;
      detail::get_int(tj, "levels", cfg.study.levels, issues, "study");
      if (cfg.study.levels < 2 || cfg.study.levels > 8)
        issues.add("study.levels must lie in [2, 8]");
      if (!tj.contains("exact") || !tj.at("exact").is_string())
        issues.add("study.exact must be an expression string");
      else {
        cfg.study.exact_text = tj.at("exact").get<std::string>();
        cfg.study.exact = detail::parse_checked(cfg.study.exact_text,
                                                "study.exact", issues);
      }
    }
  }

  // --- cross-field validation ----------------------------------------------
  const bool domain_ok =
      cfg.dimension >= 1 && cfg.dimension <= 3 &&
      cfg.bounds.size() == static_cast<std::size_t>(cfg.dimension) &&
      cfg.counts.size() == static_cast<std::size_t>(cfg.dimension) &&
      [&] {
        for (std::size_t k = 0; k < cfg.bounds.size(); ++k)
          if (!(std::isfinite(cfg.bounds[k][0]) &&
                std::isfinite(cfg.bounds[k][1]) &&
                cfg.bounds[k][0] < cfg.bounds[k][1] && cfg.counts[k] >= 1))
            return false;
        return true;
      }();
  const bool urange_ok = std::isfinite(cfg.nonlinearity.u_range[0]) &&
                         std::isfinite(cfg.nonlinearity.u_range[1]) &&
                         cfg.nonlinearity.u_range[0] < cfg.nonlinearity.u_range[1] &&
                         cfg.nonlinearity.u_samples >= 2;

  if (f_parsed) {
    detail::check_variables(*f_parsed, cfg.dimension, true, "nonlinearity.f",
                            issues);
    try {
      cfg.nonlinearity.fu = differentiate_u(*f_parsed);
      cfg.nonlinearity.f = *f_parsed;
    } catch (const NonDifferentiableError& err) {
      issues.add(std::string("nonlinearity.f: ") + err.what());
      f_parsed.reset();
    }
  }
  if (cfg.rhs)
    detail::check_variables(*cfg.rhs, cfg.dimension, false, "rhs", issues);
  if (cfg.nonlinearity.growth.a1)
    detail::check_variables(*cfg.nonlinearity.growth.a1, cfg.dimension, false,
                            "nonlinearity.growth.a1", issues);
  if (cfg.nonlinearity.growth.b1) {
    detail::check_variables(*cfg.nonlinearity.growth.b1, cfg.dimension, false,
                            "nonlinearity.growth.b1", issues);
    if (cfg.nonlinearity.growth.route == GrowthConfig::Route::Spectral) {
      for (int var = 0; var < 3; ++var)
        if (uses_variable(*cfg.nonlinearity.growth.b1, var))
          issues.add("nonlinearity.growth.b1 must be constant on the spectral route");
    }
  }
  if (cfg.study.exact)
    detail::check_variables(*cfg.study.exact, cfg.dimension, false,
                            "study.exact", issues);

  if (domain_ok && urange_ok) {
    const std::vector<std::array<double, 3>> lattice = detail::scan_lattice(cfg);
    const std::vector<double> u_values = cfg.u_sample_grid();

    // Interior grid nodes with a coarse u sweep; lattice covers the closed
    // box including the boundary.
    std::vector<std::array<double, 3>> nodes;
    {
      const GridDomain d = cfg.domain();
      const int n = d.interior_count();
      nodes.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) nodes.push_back(d.node_coords(i));
    }
    const std::vector<double> u_coarse{cfg.nonlinearity.u_range[0],
                                       0.5 * (cfg.nonlinearity.u_range[0] +
                                              cfg.nonlinearity.u_range[1]),
                                       cfg.nonlinearity.u_range[1]};

    if (f_parsed) {
      detail::scan_singularities(cfg.nonlinearity.f, lattice, u_values,
                                 "nonlinearity.f", issues);
      detail::trial_evaluate(cfg.nonlinearity.f, lattice, u_values,
                             "nonlinearity.f", issues);
      detail::trial_evaluate(cfg.nonlinearity.f, nodes, u_coarse,
                             "nonlinearity.f", issues);
      detail::trial_evaluate(cfg.nonlinearity.fu, lattice, u_values,
                             "derivative of nonlinearity.f", issues);
      detail::trial_evaluate(cfg.nonlinearity.fu, nodes, u_coarse,
                             "derivative of nonlinearity.f", issues);
    }
    if (cfg.rhs) {
      detail::scan_singularities(*cfg.rhs, lattice, u_values, "rhs", issues);
      detail::trial_evaluate(*cfg.rhs, lattice, u_values, "rhs", issues);
    }
    for (const auto* g : {&cfg.nonlinearity.growth.a1, &cfg.nonlinearity.growth.b1}) {
      if (g->has_value()) {
        const std::string label =
            g == &cfg.nonlinearity.growth.a1 ? "nonlinearity.growth.a1"
                                             : "nonlinearity.growth.b1";
        detail::scan_singularities(**g, lattice, u_values, label, issues);
        detail::trial_evaluate(**g, lattice, u_values, label, issues);
      }
    }
    if (cfg.study.exact)
      detail::trial_evaluate(*cfg.study.exact, lattice, u_values,
                             "study.exact", issues);

    // Spot-check asserted bounds against samples; a disproved assertion is
    // a validation error, not a certificate surprise later.
    if (f_parsed && issues.empty()) {
      if (cfg.nonlinearity.asserted_b3) {
        const double b3 = *cfg.nonlinearity.asserted_b3;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& p : lattice)
          for (double u : u_values)
            worst = std::max(worst, evaluate(cfg.nonlinearity.fu,
                                             Binding::all(p[0], p[1], p[2], u)));
        if (worst > b3 + 1e-12 * (1.0 + std::abs(b3)))
          issues.add("nonlinearity.asserted_b3 = " + detail::number_to_string(b3) +
                     " is contradicted by a sampled derivative value " +
                     detail::number_to_string(worst));
      }
      if (cfg.nonlinearity.growth.mode == GrowthConfig::Mode::Asserted &&
          cfg.nonlinearity.growth.a1 && cfg.nonlinearity.growth.b1) {
        const Expr& a1 = *cfg.nonlinearity.growth.a1;
        const Expr& b1 = *cfg.nonlinearity.growth.b1;
        bool reported = false;
        for (const auto& p : lattice) {
          if (reported) break;
          const Binding spatial = Binding::all(p[0], p[1], p[2], 0.0);
          const double a1v = evaluate(a1, spatial);
          const double b1v = evaluate(b1, spatial);
          if (a1v < 0.0 || b1v < 0.0) {
            issues.add("nonlinearity.growth bounds must be non-negative on the domain");
            break;
          }
          for (double u : u_values) {
            const double fv =
                std::abs(evaluate(cfg.nonlinearity.f,
                                  Binding::all(p[0], p[1], p[2], u)));
            const double bound = a1v + b1v * std::abs(u);
            if (fv > bound + 1e-12 * (1.0 + bound)) {
              issues.add("nonlinearity.growth split is contradicted: |f| = " +
                         detail::number_to_string(fv) + " exceeds a1 + b1*|u| = " +
                         detail::number_to_string(bound) + " at a sampled point");
              reported = true;
              break;
            }
          }
        }
      }
    }
  }

  if (!issues.empty()) throw ConfigError(issues.list);
  return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ConfigError({std::string("config is not valid JSON: ") + err.what()});
  }
  return load_config_json(j);
}

/// Canonical serialization of the parsed config; the digest hashes this, so
/// formatting differences in the source file do not change identity.
inline nlohmann::json canonical_config_json(const ProblemConfig& cfg) {
  nlohmann::json j;
  j["schema"] = cfg.schema;
  j["domain"]["dimension"] = cfg.dimension;
  j["domain"]["bounds"] = cfg.bounds;
  j["domain"]["counts"] = cfg.counts;
  j["nonlinearity"]["f"] = cfg.nonlinearity.f_text;
  j["nonlinearity"]["u_range"] = cfg.nonlinearity.u_range;
  j["nonlinearity"]["u_samples"] = cfg.nonlinearity.u_samples;
  if (cfg.nonlinearity.asserted_b3)
    j["nonlinearity"]["asserted_b3"] = *cfg.nonlinearity.asserted_b3;
  {
    nlohmann::json g;
    g["mode"] = cfg.nonlinearity.growth.mode == GrowthConfig::Mode::Asserted
                    ? "asserted"
                    : "sampled";
    g["route"] = cfg.nonlinearity.growth.route == GrowthConfig::Route::Embedding
                     ? "embedding"
                     : "spectral";
    if (cfg.nonlinearity.growth.a1) g["a1"] = cfg.nonlinearity.growth.a1_text;
    if (cfg.nonlinearity.growth.b1) g["b1"] = cfg.nonlinearity.growth.b1_text;
    j["nonlinearity"]["growth"] = g;
  }
  j["rhs"] = cfg.rhs_text;
  j["solver"]["tolerance"] = cfg.solver.tolerance;
  j["solver"]["max_iterations"] = cfg.solver.max_iterations;
  j["solver"]["cg_tolerance"] = cfg.solver.cg_tolerance;
  j["solver"]["armijo_c1"] = cfg.solver.armijo_c1;
  j["solver"]["backtrack"] = cfg.solver.backtrack;
  j["solver"]["min_step"] = cfg.solver.min_step;
  j["solver"]["monitor"] = cfg.solver.monitor;
  j["probe"]["starts"] = cfg.probe.starts;
  j["probe"]["seed"] = cfg.probe.seed;
  j["probe"]["amplitude"] = cfg.probe.amplitude;
  j["certificate"]["margin"] = cfg.certificate.margin;
  if (cfg.certificate.embedding_all)
    j["certificate"]["embedding_sample"] = "all";
  else
    j["certificate"]["embedding_sample"] = cfg.certificate.embedding_stride;
  if (cfg.study.present) {
    j["study"]["levels"] = cfg.study.levels;
    j["study"]["exact"] = cfg.study.exact_text;
  }
  return j;
}

}  // namespace uniqcert

#endif  // UNIQCERT_CONFIG_HPP
