#ifndef UNIQCERT_NEMYTSKII_HPP
#define UNIQCERT_NEMYTSKII_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "uniqcert/errors.hpp"
#include "uniqcert/expr.hpp"
#include "uniqcert/grid.hpp"

namespace uniqcert {

/// Pointwise nonlinearity N(u)(x_i) = f(x_i, u_i) with its u-derivative.
/// N'(u) acts as the diagonal multiplier h_i -> fu(x_i, u_i) h_i and is
/// never materialized as a matrix.
struct Nonlinearity {
  Expr f;
  Expr fu;
  GridDomain domain;
  std::vector<std::array<double, 3>> coords;
};

inline Nonlinearity make_nonlinearity(Expr f, const GridDomain& domain) {
  Nonlinearity nf;
  nf.fu = differentiate_u(f);
  nf.f = std::move(f);
  nf.domain = domain;
  const int n = domain.interior_count();
  nf.coords.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    nf.coords[static_cast<std::size_t>(i)] = domain.node_coords(i);
  return nf;
}

namespace detail {

inline double eval_at_node(const Expr& e, const std::array<double, 3>& x,
                           double u) {
  try {
    return evaluate(e, Binding::all(x[0], x[1], x[2], u));
  } catch (const EvalError& err) {
    throw EvalError(std::string(err.what()) + " at node (" +
                    number_to_string(x[0]) + ", " + number_to_string(x[1]) +
                    ", " + number_to_string(x[2]) + "), u = " +
                    number_to_string(u));
  }
}

}  // namespace detail

inline GridField apply_N(const Nonlinearity& nf, const GridField& u) {
  if (u.domain != nf.domain)
    throw GridMismatchError("apply_N: field does not match the nonlinearity's grid");
  GridField out = GridField::zeros(nf.domain);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = detail::eval_at_node(nf.f, nf.coords[i], u.values[i]);
  return out;
}

/// Diagonal of N'(u): the field fu(x_i, u_i).
inline GridField diag_Nprime(const Nonlinearity& nf, const GridField& u) {
  if (u.domain != nf.domain)
    throw GridMismatchError("diag_Nprime: field does not match the nonlinearity's grid");
  GridField out = GridField::zeros(nf.domain);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = detail::eval_at_node(nf.fu, nf.coords[i], u.values[i]);
  return out;
}

inline GridField apply_Nprime(const Nonlinearity& nf, const GridField& u,
                              const GridField& h) {
  require_same_domain(u, h, "apply_Nprime");
  GridField out = diag_Nprime(nf, u);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] *= h.values[i];
  return out;
}

/// ||N(u+h) - N(u) - N'(u)h||_h, the first-order Taylor remainder.
inline double c1_remainder(const Nonlinearity& nf, const GridField& u,
                           const GridField& h) {
  require_same_domain(u, h, "c1_remainder");
  const GridField shifted = add_scaled(u, 1.0, h);
  GridField w = apply_N(nf, shifted);
  const GridField base = apply_N(nf, u);
  const GridField linear = apply_Nprime(nf, u, h);
  for (std::size_t i = 0; i < w.values.size(); ++i)
    w.values[i] -= base.values[i] + linear.values[i];
  return norm_h(w);
}

}  // namespace uniqcert

#endif  // UNIQCERT_NEMYTSKII_HPP
