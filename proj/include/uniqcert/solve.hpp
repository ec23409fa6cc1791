#ifndef UNIQCERT_SOLVE_HPP
#define UNIQCERT_SOLVE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "uniqcert/config.hpp"
#include "uniqcert/errors.hpp"
#include "uniqcert/grid.hpp"
#include "uniqcert/nemytskii.hpp"
#include "uniqcert/operators.hpp"

namespace uniqcert {

struct SolveOptions {
  /// Convergence is declared on ||F(u) - y||_h / (1 + ||y||_h).
  double tolerance = 1e-10;
  int max_iterations = 50;
  double cg_tolerance = 1e-12;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
  bool monitor = true;
  /// When set, an observed Rayleigh quotient of F' below this floor ends
  /// the run with verdict monitor-violation.
  std::optional<double> monitor_floor;

  static SolveOptions from(const SolverConfig& s) {
    SolveOptions o;
    o.tolerance = s.tolerance;
    o.max_iterations = s.max_iterations;
    o.cg_tolerance = s.cg_tolerance;
    o.armijo_c1 = s.armijo_c1;
    o.backtrack = s.backtrack;
    o.min_step = s.min_step;
    o.monitor = s.monitor;
    return o;
  }
};

enum class SolveVerdict { Converged, Stalled, Diverged, MonitorViolation };

inline const char* verdict_name(SolveVerdict v) {
  switch (v) {
    case SolveVerdict::Converged: return "converged";
    case SolveVerdict::Stalled: return "stalled";
    case SolveVerdict::Diverged: return "diverged";
    case SolveVerdict::MonitorViolation: return "monitor-violation";
  }
  return "stalled";
}

struct SolveReport {
  GridField solution;
  int iterations = 0;
  std::vector<double> residual_norms;
  std::vector<double> step_lengths;
  std::vector<double> phi_values;
  std::optional<double> min_rayleigh;
  std::optional<double> monitor_floor;
  bool sigma_bound_ok = true;
  SolveVerdict verdict = SolveVerdict::Stalled;
  double final_relative_residual = 0.0;
  std::string note;
};

/// F(u) - y with F(u) = Au - N(u).
inline GridField residual(const DiscreteOperator& A, const Nonlinearity& nf,
                          const GridField& u, const GridField& y) {
  GridField r = A.apply(u);
  const GridField nu = apply_N(nf, u);
  require_same_domain(r, y, "residual");
  for (std::size_t i = 0; i < r.values.size(); ++i)
    r.values[i] -= nu.values[i] + y.values[i];
  return r;
}

inline double phi_value(const DiscreteOperator& A, const Nonlinearity& nf,
                        const GridField& u, const GridField& y) {
  const GridField r = residual(A, nf, u, y);
  return 0.5 * dot_h(r, r);
}

/// L2_h gradient of phi: F'(u)(F(u) - y), with F'(u) = A - N'(u) symmetric.
inline GridField grad_phi(const DiscreteOperator& A, const Nonlinearity& nf,
                          const GridField& u, const GridField& y) {
  const GridField r = residual(A, nf, u, y);
  GridField g = A.apply(r);
  const GridField nr = apply_Nprime(nf, u, r);
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] -= nr.values[i];
  return g;
}

/// Damped Gauss-Newton on phi_y, which for F(u) = Au - N(u) is Newton's
/// method on F(u) = y: each step solves F'(u) s = -(F(u) - y) by CG and
/// accepts u + t s under Armijo backtracking on phi_y.
inline SolveReport gauss_newton_solve(const DiscreteOperator& A,
                                      const Nonlinearity& nf,
                                      const GridField& y, const GridField& u0,
                                      const SolveOptions& opts = {}) {
  SolveReport rep;
  rep.monitor_floor = opts.monitor_floor;
  GridField u = u0;
  GridField r = residual(A, nf, u, y);
  double r_norm = norm_h(r);
  const double y_scale = 1.0 + norm_h(y);
  rep.residual_norms.push_back(r_norm);
  rep.phi_values.push_back(0.5 * dot_h(r, r));

  const int n = u.size();
  GridField fprime_s = GridField::zeros(u.domain);

  for (;;) {
    if (!std::isfinite(r_norm) || !all_finite(u)) {
      rep.verdict = SolveVerdict::Diverged;
      rep.note = "iterate left the finite range";
      break;
    }
    if (r_norm <= opts.tolerance * y_scale) {
      rep.verdict = SolveVerdict::Converged;
      break;
    }
    if (rep.iterations >= opts.max_iterations) {
      rep.verdict = SolveVerdict::Stalled;
      rep.note = "iteration cap reached";
      break;
    }

    const GridField diag_fu = diag_Nprime(nf, u);
    const auto fprime = [&](const GridField& v) {
      GridField out = A.apply(v);
      for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] -= diag_fu.values[i] * v.values[i];
      return out;
    };
    std::vector<double> jacobi(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < jacobi.size(); ++i) {
      const double d = A.diagonal[i] - diag_fu.values[i];
      jacobi[i] = d > 0.0 ? d : 1.0;
    }

    GridField rhs = r;
    for (double& v : rhs.values) v = -v;
    GridField s = GridField::zeros(u.domain);
    try {
      CgOptions copts;
      copts.diag = &jacobi;
      s = solve_spd(fprime, rhs, opts.cg_tolerance, copts);
    } catch (const ConvergenceError& err) {
      rep.verdict = SolveVerdict::MonitorViolation;
      rep.note = std::string("newton step failed: ") + err.what();
      break;
    }

    fprime_s = fprime(s);
    const double s_sq = dot_h(s, s);
    if (s_sq > 0.0) {
      const double rayleigh = dot_h(fprime_s, s) / s_sq;
      if (opts.monitor) {
        if (!rep.min_rayleigh || rayleigh < *rep.min_rayleigh)
          rep.min_rayleigh = rayleigh;
        if (opts.monitor_floor && rayleigh < *opts.monitor_floor) {
          rep.sigma_bound_ok = false;
          rep.verdict = SolveVerdict::MonitorViolation;
          rep.note = "rayleigh quotient fell below the certificate floor";
          break;
        }
      }
    }

    const double dir_deriv = dot_h(r, fprime_s);
    if (!(dir_deriv < 0.0)) {
      rep.verdict = SolveVerdict::Stalled;
      rep.note = "step is not a descent direction";
      break;
    }

    const double phi0 = rep.phi_values.back();
    double t = 1.0;
    bool accepted = false;
    GridField u_trial = u;
    GridField r_trial = r;
    while (t >= opts.min_step) {
      u_trial = add_scaled(u, t, s);
      double phi_trial = std::numeric_limits<double>::infinity();
      bool trial_ok = true;
      try {
        r_trial = residual(A, nf, u_trial, y);
        phi_trial = 0.5 * dot_h(r_trial, r_trial);
      } catch (const EvalError&) {
        trial_ok = false;
      }
      if (trial_ok && std::isfinite(phi_trial) &&
          phi_trial <= phi0 + opts.armijo_c1 * t * dir_deriv) {
        accepted = true;
        break;
      }
      t *= opts.backtrack;
    }
    if (!accepted) {
      rep.verdict = SolveVerdict::Stalled;
      rep.note = "line search failed below the minimum step";
      break;
    }

    u = std::move(u_trial);
    r = std::move(r_trial);
    r_norm = norm_h(r);
    rep.step_lengths.push_back(t);
    rep.residual_norms.push_back(r_norm);
    rep.phi_values.push_back(0.5 * dot_h(r, r));
    ++rep.iterations;
  }

  rep.solution = std::move(u);
  rep.final_relative_residual = r_norm / y_scale;
  return rep;
}

}  // namespace uniqcert

#endif  // UNIQCERT_SOLVE_HPP
