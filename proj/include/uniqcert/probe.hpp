#ifndef UNIQCERT_PROBE_HPP
#define UNIQCERT_PROBE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uniqcert/errors.hpp"
#include "uniqcert/grid.hpp"
#include "uniqcert/nemytskii.hpp"
#include "uniqcert/operators.hpp"
#include "uniqcert/parallel.hpp"
#include "uniqcert/rng.hpp"
#include "uniqcert/solve.hpp"

namespace uniqcert {

struct ProbeOptions {
  int starts = 10;
  std::uint64_t seed = 42;
  double amplitude = 50.0;
};

struct StartSummary {
  int index = 0;
  std::string verdict;
  int iterations = 0;
  double final_relative_residual = 0.0;
  std::optional<double> min_rayleigh;
  double solution_norm_h = 0.0;
  bool converged = false;
  std::string error;
};

struct UniquenessReport {
  int starts = 0;
  std::uint64_t seed = 0;
  double amplitude = 0.0;
  std::vector<StartSummary> runs;
  std::vector<GridField> solutions;
  double max_pairwise_discrepancy = 0.0;
  std::string verdict;
};

/// Deterministic random start: entry i is a pure function of
/// (seed, stream, node index), so results are independent of scheduling.
inline GridField random_field(const GridDomain& d, std::uint64_t seed,
                              std::uint64_t stream, double lo, double hi) {
  GridField f = GridField::zeros(d);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    f.values[i] = uniform(seed, stream, static_cast<std::uint64_t>(i), lo, hi);
  return f;
}

/// Multistart uniqueness probe: start 0 is the zero field, the rest draw
/// uniform entries in [-amplitude, amplitude]. All starts are solved
/// independently and the converged solutions compared pairwise.
inline UniquenessReport multistart(const DiscreteOperator& A,
                                   const Nonlinearity& nf, const GridField& y,
                                   const ProbeOptions& popts,
                                   const SolveOptions& sopts) {
  if (popts.starts < 2)
    throw ConfigError({"probe.starts must be at least 2"});

  UniquenessReport rep;
  rep.starts = popts.starts;
  rep.seed = popts.seed;
  rep.amplitude = popts.amplitude;
  rep.runs.resize(static_cast<std::size_t>(popts.starts));
  rep.solutions.resize(static_cast<std::size_t>(popts.starts));

  parallel_for(popts.starts, [&](int i) {
    StartSummary& s = rep.runs[static_cast<std::size_t>(i)];
    s.index = i;
    GridField u0 =
        i == 0 ? GridField::zeros(A.domain)
               : random_field(A.domain, popts.seed,
                              static_cast<std::uint64_t>(i), -popts.amplitude,
                              popts.amplitude);
    try {
      SolveReport run = gauss_newton_solve(A, nf, y, u0, sopts);
      s.verdict = verdict_name(run.verdict);
      s.iterations = run.iterations;
      s.final_relative_residual = run.final_relative_residual;
      s.min_rayleigh = run.min_rayleigh;
      s.solution_norm_h = norm_h(run.solution);
      s.converged = run.verdict == SolveVerdict::Converged;
      if (s.converged)
        rep.solutions[static_cast<std::size_t>(i)] = std::move(run.solution);
    } catch (const Error& err) {
      s.verdict = "error";
      s.error = err.what();
      s.converged = false;
    }
  });

  bool all_converged = true;
  double max_norm = 0.0;
  for (const StartSummary& s : rep.runs) {
    if (!s.converged) all_converged = false;
    max_norm = std::max(max_norm, s.solution_norm_h);
  }

  double discrepancy = 0.0;
  for (std::size_t i = 0; i < rep.solutions.size(); ++i) {
    if (!rep.runs[i].converged) continue;
    for (std::size_t k = i + 1; k < rep.solutions.size(); ++k) {
      if (!rep.runs[k].converged) continue;
      const GridField diff =
          add_scaled(rep.solutions[i], -1.0, rep.solutions[k]);
      discrepancy = std::max(discrepancy, norm_h(diff) / (1.0 + max_norm));
    }
  }
  rep.max_pairwise_discrepancy = discrepancy;

  if (!all_converged)
    rep.verdict = "inconclusive";
  else if (discrepancy > 10.0 * sopts.tolerance)
    rep.verdict = "distinct-solutions-found";
  else
    rep.verdict = "unique-within-tol";
  return rep;
}

}  // namespace uniqcert

#endif  // UNIQCERT_PROBE_HPP
