#ifndef UNIQCERT_CERTIFY_HPP
#define UNIQCERT_CERTIFY_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "uniqcert/config.hpp"
#include "uniqcert/errors.hpp"
#include "uniqcert/expr.hpp"
#include "uniqcert/grid.hpp"
#include "uniqcert/laplacian.hpp"
#include "uniqcert/nemytskii.hpp"
#include "uniqcert/operators.hpp"

namespace uniqcert {

enum class Provenance { Computed, Sampled, Asserted };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Computed: return "computed";
    case Provenance::Sampled: return "sampled";
    case Provenance::Asserted: return "asserted";
  }
  return "computed";
}

struct ConstantEstimate {
  double value = 0.0;
  Provenance provenance = Provenance::Computed;
};

struct HypothesisCertificate {
  double alpha = 0.0;
  ConstantEstimate gamma;
  ConstantEstimate beta;
  ConstantEstimate delta;
  std::optional<EmbeddingResult> c_m;
  bool a2_pass = false;
  bool n1_pass = false;
  bool n2i_pass = false;
  bool n2ii_pass = false;
  bool p3_pass = false;
  double margin_alpha_gamma = 0.0;
  double margin_beta = 0.0;
  std::string overall = "FAIL";
  std::string a1_note = "A1: satisfied trivially at the discrete level";
  std::string n1_note =
      "N1: satisfied by construction (symbolic derivative, diagonal multiplier)";
  std::string p2m_note =
      "P2m: derivative finite on the sampled range; continuity not certified";
};

/// Shared spectral data so several certificates over the same domain reuse
/// the expensive eigenvalue and Green-function work.
struct OperatorBundle {
  GridDomain domain;
  DiscreteOperator A;
  double alpha = 0.0;
  GridField ground_mode;
  EmbeddingResult c_m;
};

inline OperatorBundle prepare_operators(const ProblemConfig& cfg) {
  OperatorBundle ops;
  ops.domain = cfg.domain();
  ops.A = build_laplacian(ops.domain);
  EigenResult eig = smallest_eigenvalue(ops.A, 1e-12);
  ops.alpha = eig.value;
  ops.ground_mode = std::move(eig.mode);
  EmbeddingOptions eopts;
  eopts.all = cfg.certificate.embedding_all;
  eopts.stride = cfg.certificate.embedding_stride;
  ops.c_m = embedding_constant(ops.A, eopts);
  return ops;
}

/// Largest sampled value of f'_u over grid nodes and the u sample grid, or
/// the asserted analytic bound when one is configured.
inline ConstantEstimate estimate_gamma(const Nonlinearity& nf,
                                       const std::vector<double>& u_samples,
                                       std::optional<double> asserted_b3) {
  if (asserted_b3) return {*asserted_b3, Provenance::Asserted};
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& x : nf.coords)
    for (double u : u_samples)
      worst = std::max(worst, detail::eval_at_node(nf.fu, x, u));
  return {worst, Provenance::Sampled};
}

struct GrowthEstimate {
  ConstantEstimate beta;
  ConstantEstimate delta;
};

namespace detail {

inline double field_norm_of(const Expr& e, const GridDomain& d) {
  const GridField f = GridField::from_fn(d, [&](double x, double y, double z) {
    return evaluate(e, Binding::all(x, y, z, 0.0));
  });
  return norm_h(f);
}

}  // namespace detail

/// Constants for ||N(u)||_h <= beta ||Au||_h + delta. Asserted mode uses the
/// configured split |f(x,u)| <= a1(x) + b1(x)|u|; sampled mode fits an
/// affine envelope of max_x |f(x,u)| against |u| and lifts the intercept
/// until it dominates every sample.
inline GrowthEstimate estimate_beta_delta(const ProblemConfig& cfg,
                                          const Nonlinearity& nf,
                                          const OperatorBundle& ops) {
  const GrowthConfig& g = cfg.nonlinearity.growth;
  const double sqrt_vol =
      std::sqrt(ops.domain.cell_volume() * ops.domain.interior_count());
  GrowthEstimate out;

  if (g.mode == GrowthConfig::Mode::Asserted) {
    if (!g.a1 || !g.b1)
      throw ConfigError({"asserted growth mode requires a1 and b1"});
    const double a1_norm = detail::field_norm_of(*g.a1, ops.domain);
    out.delta = {a1_norm, Provenance::Asserted};
    if (g.route == GrowthConfig::Route::Embedding) {
      const double b1_norm = detail::field_norm_of(*g.b1, ops.domain);
      out.beta = {ops.c_m.value * b1_norm, Provenance::Asserted};
    } else {
      const double b1_value = evaluate(*g.b1, Binding::all(0, 0, 0, 0));
      out.beta = {b1_value / ops.alpha, Provenance::Asserted};
    }
    return out;
  }

  const std::vector<double> u_samples = cfg.u_sample_grid();
  std::vector<double> abs_u;
  std::vector<double> env;
  abs_u.reserve(u_samples.size());
  env.reserve(u_samples.size());
  for (double u : u_samples) {
    double m = 0.0;
    for (const auto& x : nf.coords)
      m = std::max(m, std::abs(detail::eval_at_node(nf.f, x, u)));
    abs_u.push_back(std::abs(u));
    env.push_back(m);
  }
  int distinct = 0;
  for (std::size_t i = 0; i < abs_u.size(); ++i) {
    bool seen = false;
    for (std::size_t k = 0; k < i; ++k)
      if (abs_u[k] == abs_u[i]) seen = true;
    if (!seen) ++distinct;
  }
  if (distinct < 2)
    throw ConfigError(
        {"degenerate growth fit: u_range yields fewer than two distinct |u| values"});

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(abs_u.size());
  for (std::size_t i = 0; i < abs_u.size(); ++i) {
    sx += abs_u[i];
    sy += env[i];
    sxx += abs_u[i] * abs_u[i];
    sxy += abs_u[i] * env[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!(slope > 0.0)) slope = 0.0;
  double intercept = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < abs_u.size(); ++i)
    intercept = std::max(intercept, env[i] - slope * abs_u[i]);
  intercept = std::max(intercept, 0.0);

  out.delta = {intercept * sqrt_vol, Provenance::Sampled};
  if (g.route == GrowthConfig::Route::Embedding)
    out.beta = {ops.c_m.value * slope * sqrt_vol, Provenance::Sampled};
  else
    out.beta = {slope / ops.alpha, Provenance::Sampled};
  return out;
}

inline HypothesisCertificate certify(const ProblemConfig& cfg,
                                     const OperatorBundle& ops) {
  const Nonlinearity nf = make_nonlinearity(cfg.nonlinearity.f, ops.domain);
  HypothesisCertificate cert;
  cert.alpha = ops.alpha;
  cert.c_m = ops.c_m;
  cert.gamma = estimate_gamma(nf, cfg.u_sample_grid(),
                              cfg.nonlinearity.asserted_b3);
  const GrowthEstimate growth = estimate_beta_delta(cfg, nf, ops);
  cert.beta = growth.beta;
  cert.delta = growth.delta;

  const double margin = cfg.certificate.margin;
  cert.margin_alpha_gamma = cert.alpha - cert.gamma.value;
  cert.margin_beta = 1.0 - cert.beta.value;
  cert.a2_pass = cert.alpha > 0.0;
  cert.n1_pass = true;
  cert.n2i_pass = cert.beta.value >= 0.0 &&
                  cert.beta.value <= (1.0 - margin) &&
                  cert.delta.value >= 0.0;
  cert.n2ii_pass = cert.gamma.value <= cert.alpha * (1.0 - margin);
  cert.p3_pass = std::isfinite(cert.gamma.value);

  const bool all_pass = cert.a2_pass && cert.n1_pass && cert.n2i_pass &&
                        cert.n2ii_pass && cert.p3_pass;
  if (!all_pass) {
    cert.overall = "FAIL";
  } else {
    const bool any_sampled = cert.gamma.provenance == Provenance::Sampled ||
                             cert.beta.provenance == Provenance::Sampled ||
                             cert.delta.provenance == Provenance::Sampled ||
                             (cert.c_m && !cert.c_m->exact);
    cert.overall = any_sampled ? "PASS-SAMPLED" : "PASS";
  }
  return cert;
}

inline HypothesisCertificate certify(const ProblemConfig& cfg) {
  return certify(cfg, prepare_operators(cfg));
}

}  // namespace uniqcert

#endif  // UNIQCERT_CERTIFY_HPP
