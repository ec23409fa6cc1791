// Damped Gauss-Newton: residual and gradient oracles, one-step linear
// solves, quadratic local convergence, and the failure verdicts.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "uniqcert/laplacian.hpp"
#include "uniqcert/nemytskii.hpp"
#include "uniqcert/rng.hpp"
#include "uniqcert/solve.hpp"

using namespace uniqcert;

namespace {

constexpr double kPi = 3.141592653589793;

GridDomain unit_interval(int n) {
  return GridDomain::box(1, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {n, 1, 1});
}

}  // namespace

TEST_CASE("residual, phi, and gradient on a hand-sized system") {
  // h = 1/4, f = 10u, u = (1,1,1), y = 0:
  //   A u = (16, 0, 16), N(u) = (10, 10, 10), F(u) - y = (6, -10, 6).
  const GridDomain d = unit_interval(3);
  const DiscreteOperator A = build_laplacian(d);
  const Nonlinearity nf = make_nonlinearity(parse("10*u"), d);
  const GridField u = GridField::constant(d, 1.0);
  const GridField y = GridField::zeros(d);

  const GridField r = residual(A, nf, u, y);
  CHECK(r.values == std::vector<double>{6.0, -10.0, 6.0});

  // phi = (h/2) * (36 + 100 + 36).
  CHECK(phi_value(A, nf, u, y) == 21.5);

  // grad = (A - 10 I) r = (292, -412, 292), all exact in binary.
  const GridField g = grad_phi(A, nf, u, y);
  CHECK(g.values == std::vector<double>{292.0, -412.0, 292.0});
}

TEST_CASE("gradient matches central differences of phi") {
  const GridDomain d = unit_interval(9);
  const DiscreteOperator A = build_laplacian(d);
  const Nonlinearity nf = make_nonlinearity(parse("sin(u) + 0.5*u^2"), d);
  GridField u = GridField::zeros(d);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    u.values[i] = uniform(99, 1, i, -1.0, 1.0);
  const GridField y =
      GridField::from_fn(d, [](double x, double, double) { return x * (1.0 - x); });

  const GridField g = grad_phi(A, nf, u, y);
  const double vol = d.cell_volume();
  const double eps = 1e-6;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    GridField up = u, dn = u;
    up.values[i] += eps;
    dn.values[i] -= eps;
    const double fd =
        (phi_value(A, nf, up, y) - phi_value(A, nf, dn, y)) / (2.0 * eps);
    // d phi / d u_i carries the cell volume of the weighted inner product.
    CHECK_THAT(fd, Catch::Matchers::WithinAbs(vol * g.values[i],
                                              1e-5 * (1.0 + std::abs(fd))));
  }
}

TEST_CASE("affine problems converge in a single full step") {
  const GridDomain d = unit_interval(15);
  const DiscreteOperator A = build_laplacian(d);
  const Nonlinearity nf = make_nonlinearity(parse("5*u"), d);
  const GridField y =
      GridField::from_fn(d, [](double x, double, double) { return std::sin(kPi * x); });
  SolveOptions opts;
  opts.tolerance = 1e-10;
  opts.cg_tolerance = 1e-13;

  const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d), opts);
  CHECK(rep.verdict == SolveVerdict::Converged);
  CHECK(rep.iterations == 1);
  CHECK(rep.step_lengths == std::vector<double>{1.0});
  CHECK(rep.final_relative_residual <= 1e-10);
  CHECK_THAT(rep.final_relative_residual,
             Catch::Matchers::WithinRel(
                 rep.residual_norms.back() / (1.0 + norm_h(y)), 1e-12));

  // The solution solves (A - 5I) u = y: for the sine right-hand side that
  // is the eigen-problem, u = y / (lambda - 5).
  const double lambda = 4.0 * 256.0 * std::sin(kPi / 32.0) * std::sin(kPi / 32.0);
  for (std::size_t i = 0; i < rep.solution.values.size(); ++i)
    CHECK_THAT(rep.solution.values[i],
               Catch::Matchers::WithinRel(y.values[i] / (lambda - 5.0), 1e-9));
}

TEST_CASE("phi decreases strictly along the accepted steps") {
  const GridDomain d = unit_interval(15);
  const DiscreteOperator A = build_laplacian(d);
  const Nonlinearity nf = make_nonlinearity(parse("sin(2*u) + u^2"), d);
  const GridField y =
      GridField::from_fn(d, [](double x, double, double) { return 4.0 * x; });
  const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d));
  REQUIRE(rep.verdict == SolveVerdict::Converged);
  REQUIRE(rep.phi_values.size() == static_cast<std::size_t>(rep.iterations) + 1);
  for (std::size_t k = 1; k < rep.phi_values.size(); ++k)
    CHECK(rep.phi_values[k] < rep.phi_values[k - 1]);
  for (double t : rep.step_lengths) {
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
  }
}

TEST_CASE("newton iteration is locally quadratic") {
  const GridDomain d = unit_interval(15);
  const DiscreteOperator A = build_laplacian(d);
  const Nonlinearity nf = make_nonlinearity(parse("u^2"), d);
  const GridField y =
      GridField::from_fn(d, [](double x, double, double) { return 2.0 * std::sin(kPi * x); });
  SolveOptions opts;
  opts.tolerance = 1e-12;
  opts.cg_tolerance = 1e-14;
  const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d), opts);
  REQUIRE(rep.verdict == SolveVerdict::Converged);

  // gamma from the solution scale; alpha from the closed form.
  const double alpha = 4.0 * 256.0 * std::sin(kPi / 32.0) * std::sin(kPi / 32.0);
  const double gamma = 2.0 * norm_inf(rep.solution);
  REQUIRE(gamma < alpha);
  const double c_bound = 1e3 / (alpha - gamma);
  int checked = 0;
  for (std::size_t k = 0; k + 1 < rep.residual_norms.size(); ++k) {
    const double rk = rep.residual_norms[k];
    const double rn = rep.residual_norms[k + 1];
    if (rn < 1e-11) break;  // inner-solve accuracy floor
    CHECK(rn <= c_bound * rk * rk);
    ++checked;
  }
  CHECK(checked >= 2);
}

TEST_CASE("failure verdicts are reported, not hidden") {
  const GridDomain d = unit_interval(15);
  const DiscreteOperator A = build_laplacian(d);

  SECTION("indefinite derivative breaks the inner solve") {
    const Nonlinearity nf = make_nonlinearity(parse("40*u"), d);
    const GridField y = GridField::constant(d, 1.0);
    const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d));
    CHECK(rep.verdict == SolveVerdict::MonitorViolation);
    CHECK(rep.note.find("newton step failed") == 0);
  }

  SECTION("rayleigh floor breach flags the sigma bound") {
    // F' = A - 8I is definite but its ground value sits near 1.84; a floor
    // of 5 must trip on the sine-aligned first step.
    const Nonlinearity nf = make_nonlinearity(parse("8*u"), d);
    const GridField y =
        GridField::from_fn(d, [](double x, double, double) { return std::sin(kPi * x); });
    SolveOptions opts;
    opts.monitor_floor = 5.0;
    const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d), opts);
    CHECK(rep.verdict == SolveVerdict::MonitorViolation);
    CHECK_FALSE(rep.sigma_bound_ok);
    REQUIRE(rep.min_rayleigh.has_value());
    const double alpha = 4.0 * 256.0 * std::sin(kPi / 32.0) * std::sin(kPi / 32.0);
    CHECK_THAT(*rep.min_rayleigh, Catch::Matchers::WithinRel(alpha - 8.0, 1e-6));
  }

  SECTION("iteration cap stalls") {
    const Nonlinearity nf = make_nonlinearity(parse("sin(u)"), d);
    const GridField y = GridField::constant(d, 1.0);
    SolveOptions opts;
    opts.max_iterations = 0;
    const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d), opts);
    CHECK(rep.verdict == SolveVerdict::Stalled);
    CHECK(rep.note == "iteration cap reached");
    CHECK(rep.iterations == 0);
  }

  SECTION("non-finite iterates are diverged") {
    const Nonlinearity nf = make_nonlinearity(parse("0"), d);
    const GridField y = GridField::zeros(d);
    const GridField u0 = GridField::constant(d, 1e307);  // A u overflows
    const SolveReport rep = gauss_newton_solve(A, nf, y, u0);
    CHECK(rep.verdict == SolveVerdict::Diverged);
  }

  SECTION("monitor can be disabled") {
    const Nonlinearity nf = make_nonlinearity(parse("u"), d);
    const GridField y = GridField::constant(d, 1.0);
    SolveOptions opts;
    opts.monitor = false;
    const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d), opts);
    CHECK(rep.verdict == SolveVerdict::Converged);
    CHECK_FALSE(rep.min_rayleigh.has_value());
  }
}

TEST_CASE("newton agrees with a fixed-point contraction on the running example") {
  const GridDomain d =
      GridDomain::box(3, {1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}, {7, 7, 7});
  const DiscreteOperator A = build_laplacian(d);
  const Nonlinearity nf =
      make_nonlinearity(parse("(1 - 1/(x^2+y^2+z^2))*(10*u - 1)"), d);
  const GridField y = GridField::zeros(d);

  SolveOptions opts;
  opts.tolerance = 1e-11;
  opts.cg_tolerance = 1e-13;
  const SolveReport rep = gauss_newton_solve(A, nf, y, GridField::zeros(d), opts);
  REQUIRE(rep.verdict == SolveVerdict::Converged);

  // Independent scheme: u <- A^{-1} N(u) contracts with factor about
  // gamma/alpha ~ 0.3, so 60 sweeps reach the inner-solve accuracy.
  GridField u = GridField::zeros(d);
  for (int k = 0; k < 60; ++k)
    u = solve_spd(A, apply_N(nf, u), 1e-13);
  const GridField diff = add_scaled(rep.solution, -1.0, u);
  CHECK(norm_h(diff) <= 1e-9);
}
