#ifndef UNIQCERT_OPERATORS_HPP
#define UNIQCERT_OPERATORS_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "uniqcert/errors.hpp"
#include "uniqcert/grid.hpp"

namespace uniqcert {

/// Symmetric sparse operator in compressed row form over a grid's interior
/// nodes. Mirror entries are assembled from the same expression, so the
/// matrix is exactly symmetric bit for bit.
struct DiscreteOperator {
  GridDomain domain;
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> vals;
  std::vector<double> diagonal;

  void apply_into(const GridField& u, GridField& out) const {
    if (u.domain != domain || out.domain != domain)
      throw GridMismatchError("apply: field does not live on the operator's grid");
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        acc += vals[k] * u.values[static_cast<std::size_t>(cols[k])];
      out.values[static_cast<std::size_t>(i)] = acc;
    }
  }

  GridField apply(const GridField& u) const {
    GridField out = GridField::zeros(domain);
    apply_into(u, out);
    return out;
  }
};

struct CgStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

struct CgOptions {
  /// 0 means a default cap of 10 * n.
  int max_iterations = 0;
  /// Jacobi preconditioner entries; empty disables preconditioning.
  const std::vector<double>* diag = nullptr;
  /// Optional warm start.
  const GridField* x0 = nullptr;
  CgStats* stats = nullptr;
};

/// Conjugate gradients on a symmetric positive definite operator closure.
/// Terminates when the plain 2-norm residual drops to tol * ||b|| (the
/// cell-volume weighting cancels in the ratio). Throws ConvergenceError on
/// the iteration cap or on a direction of non-positive curvature.
template <class ApplyFn>
GridField solve_spd(ApplyFn&& apply_op, const GridField& b, double tol,
                    const CgOptions& opts = {}) {
  const int n = b.size();
  const int cap = opts.max_iterations > 0 ? opts.max_iterations : 10 * n;
  const auto dot = [](const GridField& x, const GridField& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i)
      acc += x.values[i] * y.values[i];
    return acc;
  };

  GridField x = opts.x0 ? *opts.x0 : GridField::zeros(b.domain);
  const double b_norm = std::sqrt(dot(b, b));
  if (opts.stats) *opts.stats = CgStats{};
  if (b_norm == 0.0) return GridField::zeros(b.domain);

  GridField r = b;
  if (opts.x0) {
    GridField ax = apply_op(x);
    for (std::size_t i = 0; i < r.values.size(); ++i)
      r.values[i] -= ax.values[i];
  }

  const auto precondition = [&](const GridField& in, GridField& out) {
    if (opts.diag) {
      for (std::size_t i = 0; i < in.values.size(); ++i)
        out.values[i] = in.values[i] / (*opts.diag)[i];
    } else {
      out.values = in.values;
    }
  };

  GridField z = GridField::zeros(b.domain);
  precondition(r, z);
  GridField p = z;
  GridField ap = GridField::zeros(b.domain);
  double rz = dot(r, z);
  double r_norm = std::sqrt(dot(r, r));
  int iterations = 0;

  while (r_norm > tol * b_norm) {
    if (iterations >= cap)
      throw ConvergenceError("cg: no convergence within " +
                             std::to_string(cap) + " iterations (n=" +
                             std::to_string(n) + ")");
    ap = apply_op(p);
    const double p_ap = dot(p, ap);
    if (p_ap <= 0.0)
      throw ConvergenceError(
          "cg: encountered a direction of non-positive curvature; operator "
          "is not positive definite");
    const double alpha = rz / p_ap;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      x.values[i] += alpha * p.values[i];
      r.values[i] -= alpha * ap.values[i];
    }
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.values.size(); ++i)
      p.values[i] = z.values[i] + beta * p.values[i];
    r_norm = std::sqrt(dot(r, r));
    ++iterations;
  }
  if (opts.stats) {
    opts.stats->iterations = iterations;
    opts.stats->relative_residual = r_norm / b_norm;
  }
  return x;
}

inline GridField solve_spd(const DiscreteOperator& A, const GridField& b,
                           double tol, const CgOptions& opts = {}) {
  CgOptions with_diag = opts;
  if (!with_diag.diag) with_diag.diag = &A.diagonal;
  return solve_spd([&A](const GridField& v) { return A.apply(v); }, b, tol,
                   with_diag);
}

struct EigenResult {
  double value = 0.0;
  GridField mode;
  int iterations = 0;
};

/// Inverse power iteration for the smallest eigenvalue. Stops when
/// successive Rayleigh quotients differ by less than tol * lambda.
inline EigenResult smallest_eigenvalue(const DiscreteOperator& A,
                                       double tol = 1e-12,
                                       int max_iterations = 500) {
  GridField v = GridField::constant(A.domain, 1.0);
  {
    const double s = 1.0 / norm_h(v);
    for (double& x : v.values) x *= s;
  }
  const double cg_tol = std::min(1e-10, tol);
  GridField av = A.apply(v);
  double lambda = dot_h(av, v);
  // Warm start for the next solve: the solution of A w = v is close to
  // v / lambda once the iterate aligns with the eigenvector.
  GridField guess = GridField::zeros(A.domain);

  for (int k = 1; k <= max_iterations; ++k) {
    CgOptions opts;
    opts.diag = &A.diagonal;
    opts.x0 = &guess;
    GridField w = solve_spd([&A](const GridField& in) { return A.apply(in); },
                            v, cg_tol, opts);
    const double s = 1.0 / norm_h(w);
    for (double& x : w.values) x *= s;
    A.apply_into(w, av);
    const double next = dot_h(av, w);
    const bool settled = std::abs(next - lambda) < tol * std::abs(next);
    lambda = next;
    v = w;
    guess = std::move(w);
    for (double& x : guess.values) x /= lambda;
    if (settled) {
      EigenResult out;
      out.value = lambda;
      out.mode = std::move(v);
      out.iterations = k;
      return out;
    }
  }
  throw ConvergenceError("inverse power iteration: no convergence within " +
                         std::to_string(max_iterations) + " steps");
}

inline double graph_norm(const DiscreteOperator& A, const GridField& u) {
  const GridField au = A.apply(u);
  return std::sqrt(dot_h(u, u) + dot_h(au, au));
}

}  // namespace uniqcert

#endif  // UNIQCERT_OPERATORS_HPP
