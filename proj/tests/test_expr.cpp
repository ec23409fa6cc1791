// Parser, printer, evaluator, and u-derivative of the expression layer.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "uniqcert/expr.hpp"
#include "uniqcert/rng.hpp"

using namespace uniqcert;

namespace {

Expr c(double v) { return Expr::constant(v); }
Expr vx() { return Expr::variable(kVarX); }
Expr vu() { return Expr::variable(kVarU); }

double eval_xu(const Expr& e, double x, double u) {
  return evaluate(e, Binding::all(x, 0.0, 0.0, u));
}

// Central finite difference in u.
double fd_u(const Expr& e, const Binding& b, double step) {
  Binding hi = b;
  Binding lo = b;
  hi.values[kVarU] += step;
  lo.values[kVarU] -= step;
  return (evaluate(e, hi) - evaluate(e, lo)) / (2.0 * step);
}

}  // namespace

TEST_CASE("parse builds the documented trees") {
  SECTION("top-level product of guarded factors") {
    const Expr e = parse("(1 - 1/(x^2+y^2+z^2)) * (10*u - 1)");
    REQUIRE(e.kind == ExprKind::Binary);
    REQUIRE(e.op == ExprOp::Mul);
    REQUIRE(e.kids[0].op == ExprOp::Sub);
    REQUIRE(e.kids[1].op == ExprOp::Sub);
    REQUIRE(e.kids[1].kids[0].op == ExprOp::Mul);
  }
  SECTION("single variable") {
    const Expr e = parse("u");
    REQUIRE(e.kind == ExprKind::Variable);
    REQUIRE(e.var == kVarU);
  }
  SECTION("hand-parsed reference tree for sin(3.14*x) + u^2") {
    const Expr want = Expr::binary(
        ExprOp::Add,
        Expr::call(ExprFunc::Sin, Expr::binary(ExprOp::Mul, c(3.14), vx())),
        Expr::binary(ExprOp::Pow, vu(), c(2.0)));
    REQUIRE(parse("sin(3.14*x) + u^2") == want);
    REQUIRE(parse("sin( 3.14 * x )+u ^ 2") == want);
  }
}

TEST_CASE("parse follows the stated precedence") {
  // ^ binds tighter than unary minus, which binds tighter than * and /.
  CHECK(eval_xu(parse("-2^2"), 0, 0) == -4.0);
  CHECK(eval_xu(parse("2^3^2"), 0, 0) == 512.0);  // right associative
  CHECK(eval_xu(parse("2^-1"), 0, 0) == 0.5);
  CHECK(eval_xu(parse("6 - 2 - 1"), 0, 0) == 3.0);  // left associative
  CHECK(eval_xu(parse("12 / 2 / 3"), 0, 0) == 2.0);
  CHECK(eval_xu(parse("1 + 2*3^2"), 0, 0) == 19.0);
  CHECK(eval_xu(parse("-x^2"), 3, 0) == -9.0);
  CHECK(parse("2*-3").kids[1] == c(-3.0));
}

TEST_CASE("parse rejects malformed input with a position") {
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("1 +"), ParseError);
  CHECK_THROWS_AS(parse("(1"), ParseError);
  CHECK_THROWS_AS(parse("1)"), ParseError);
  CHECK_THROWS_AS(parse("sin x"), ParseError);
  CHECK_THROWS_AS(parse("foo(3)"), ParseError);
  CHECK_THROWS_AS(parse("v + 1"), ParseError);
  CHECK_THROWS_AS(parse("1 & 2"), ParseError);
  CHECK_THROWS_WITH(parse("x + #"), Catch::Matchers::ContainsSubstring("position 4"));
  CHECK_THROWS_WITH(parse("q"), Catch::Matchers::ContainsSubstring("position 0"));
}

TEST_CASE("evaluate matches hand arithmetic") {
  CHECK(evaluate(parse("u"), Binding::all(0, 0, 0, 5)) == 5.0);
  CHECK(evaluate(parse("2*u + x"), Binding::all(1, 0, 0, 2)) == 5.0);
  const Expr e = parse("(1 - 1/(x^2+y^2+z^2))*(10*u - 1)");
  CHECK_THAT(evaluate(e, Binding::all(1, 1, 1, 0)),
             Catch::Matchers::WithinRel(-2.0 / 3.0, 1e-15));
  CHECK_THAT(evaluate(parse("sin(x)^2 + cos(x)^2"), Binding::all(0.731, 0, 0, 0)),
             Catch::Matchers::WithinRel(1.0, 1e-14));
  CHECK(evaluate(parse("0^0"), Binding::all(0, 0, 0, 0)) == 1.0);
}

TEST_CASE("evaluate reports domain errors") {
  CHECK_THROWS_AS(evaluate(parse("1/x"), Binding::all(0, 0, 0, 0)), EvalError);
  CHECK_THROWS_AS(evaluate(parse("log(x)"), Binding::all(0, 0, 0, 0)), EvalError);
  CHECK_THROWS_AS(evaluate(parse("log(x)"), Binding::all(-1, 0, 0, 0)), EvalError);
  CHECK_THROWS_AS(evaluate(parse("sqrt(x)"), Binding::all(-4, 0, 0, 0)), EvalError);
  CHECK_THROWS_AS(evaluate(parse("x^0.5"), Binding::all(-4, 0, 0, 0)), EvalError);
  CHECK_THROWS_AS(evaluate(parse("x^-2"), Binding::all(0, 0, 0, 0)), EvalError);
  CHECK(evaluate(parse("abs(x)"), Binding::all(-3, 0, 0, 0)) == 3.0);

  // Unbound variables are an error even in dead branches of the tree.
  Binding b;
  b.set(kVarU, 1.0);
  CHECK(evaluate(parse("u + 1"), b) == 2.0);
  CHECK_THROWS_AS(evaluate(parse("u + 0*x"), b), EvalError);
}

TEST_CASE("differentiate_u reproduces the documented results") {
  SECTION("affine factor drops to its slope") {
    CHECK(differentiate_u(parse("10*u - 1")) == c(10.0));
  }
  SECTION("product with a u-free factor keeps the factor") {
    const Expr d = differentiate_u(parse("(1 - 1/(x^2+y^2+z^2))*(10*u-1)"));
    CHECK(d == parse("(1 - 1/(x^2+y^2+z^2))*10"));
  }
  SECTION("power rule") {
    CHECK(differentiate_u(parse("u^2")) == parse("2*u"));
  }
  SECTION("sin(u)^2 against central differences") {
    const Expr e = parse("sin(u)^2");
    const Expr d = differentiate_u(e);
    const Binding b = Binding::all(0, 0, 0, 0.3);
    const double expect = 2.0 * std::sin(0.3) * std::cos(0.3);
    CHECK_THAT(evaluate(d, b), Catch::Matchers::WithinRel(expect, 1e-14));
    CHECK_THAT(evaluate(d, b), Catch::Matchers::WithinRel(fd_u(e, b, 1e-6), 1e-8));
  }
  SECTION("u-free expressions vanish, chain rules hold") {
    CHECK(differentiate_u(parse("sin(x) + x^3")) == c(0.0));
    CHECK(differentiate_u(parse("sin(u)")) == parse("cos(u)"));
    CHECK(differentiate_u(parse("exp(2*u)")) == parse("exp(2*u)*2"));
    CHECK(differentiate_u(parse("log(u)")) == parse("1/u"));
    CHECK(differentiate_u(parse("sqrt(u)")) == parse("1/(2*sqrt(u))"));
    CHECK(differentiate_u(parse("x*u")) == vx());
  }
  SECTION("general power goes through the exponential form") {
    const Expr d = differentiate_u(parse("u^u"));
    const Binding b = Binding::all(0, 0, 0, 1.7);
    CHECK_THAT(evaluate(d, b),
               Catch::Matchers::WithinRel(fd_u(parse("u^u"), b, 1e-6), 1e-8));
  }
  SECTION("abs is rejected") {
    CHECK_THROWS_AS(differentiate_u(parse("abs(u)")), NonDifferentiableError);
    CHECK_THROWS_AS(differentiate_u(parse("abs(u) + 1")), NonDifferentiableError);
    // Rejection is unconditional: abs anywhere in the tree refuses the
    // derivative, u-free or not, rather than special-casing positions.
    CHECK_THROWS_AS(differentiate_u(parse("abs(x)")), NonDifferentiableError);
  }
}

TEST_CASE("printed expressions parse back to the same tree") {
  const char* cases[] = {
      "(1 - 1/(x^2+y^2+z^2)) * (10*u - 1)",
      "sin(3.14*x) + u^2",
      "-2^2",
      "2^3^2",
      "x*-3",
      "1 - -2",
      "-(x + 1)",
      "(x + 1)*(y - 2)",
      "x - (y - z)",
      "x/(y*z)",
      "(x/y)/z",
      "x^(y + 1)",
      "(x^2)^3",
      "2^-1",
      "abs(x) + sqrt(y)*log(z + 4)",
      "exp(-x^2)",
      "1e-3*x + 2.5E2",
      "0.5^u",
  };
  for (const char* s : cases) {
    INFO(s);
    const Expr e = parse(s);
    const Expr back = parse(print(e));
    CHECK(back == e);
    // Printing is a pure function of the tree.
    CHECK(print(back) == print(e));
  }
  // An explicit negation of a literal stays distinct from a negative literal.
  const Expr neg = Expr::unary(ExprOp::Neg, c(5.0));
  CHECK(parse(print(neg)) == neg);
  CHECK(parse("-5") == c(-5.0));
  CHECK(parse("- 5") == c(-5.0));
  CHECK(parse(print(c(-5.0))) == c(-5.0));
}

namespace {

// Bounded random generator over the differentiable fragment. Division and
// the transcendental calls only see arguments bounded away from their
// domain edges: denominators and log/sqrt arguments have the form
// (e)^2 + shift with shift >= 0.5.
Expr gen_expr(std::uint64_t seed, std::uint64_t& counter, int depth) {
  const auto pick = [&](std::uint64_t n) {
    return random_word(seed, 17, counter++) % n;
  };
  const auto unit = [&] {
    return uniform(seed, 23, counter++, -2.5, 2.5);
  };
  if (depth <= 0) {
    switch (pick(3)) {
      case 0: return Expr::constant(unit());
      case 1: return Expr::variable(static_cast<int>(pick(3)));
      default: return Expr::variable(kVarU);
    }
  }
  const auto sub = [&](int d) { return gen_expr(seed, counter, d); };
  const auto guarded = [&](int d) {
    const double shift = 0.5 + std::abs(unit());
    return Expr::binary(ExprOp::Add,
                        Expr::binary(ExprOp::Pow, sub(d), Expr::constant(2.0)),
                        Expr::constant(shift));
  };
  switch (pick(10)) {
    case 0: return Expr::binary(ExprOp::Add, sub(depth - 1), sub(depth - 1));
    case 1: return Expr::binary(ExprOp::Sub, sub(depth - 1), sub(depth - 1));
    case 2: return Expr::binary(ExprOp::Mul, sub(depth - 1), sub(depth - 1));
    case 3: return Expr::binary(ExprOp::Div, sub(depth - 1), guarded(depth - 2));
    case 4:
      return Expr::binary(ExprOp::Pow, sub(depth - 1),
                          Expr::constant(static_cast<double>(2 + pick(2))));
    case 5: return Expr::unary(ExprOp::Neg, sub(depth - 1));
    case 6: return Expr::call(ExprFunc::Sin, sub(depth - 1));
    case 7: return Expr::call(ExprFunc::Cos, sub(depth - 1));
    case 8: return Expr::call(ExprFunc::Log, guarded(depth - 2));
    default: return Expr::call(ExprFunc::Sqrt, guarded(depth - 2));
  }
}

}  // namespace

TEST_CASE("random expressions: round trip, determinism, derivative") {
  int fd_checked = 0;
  std::uint64_t counter = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Expr e = gen_expr(2026, counter, 4);
    INFO("trial " << trial << ": " << print(e));

    const Expr back = parse(print(e));
    REQUIRE(back == e);

    const Binding b = Binding::all(
        uniform(9001, 1, static_cast<std::uint64_t>(trial), -2.0, 2.0),
        uniform(9001, 2, static_cast<std::uint64_t>(trial), -2.0, 2.0),
        uniform(9001, 3, static_cast<std::uint64_t>(trial), -2.0, 2.0),
        uniform(9001, 4, static_cast<std::uint64_t>(trial), -2.0, 2.0));

    double value = 0.0;
    bool defined = true;
    try {
      value = evaluate(e, b);
    } catch (const EvalError&) {
      defined = false;  // overflow guard tripped somewhere inside
    }
    if (!defined) continue;

    // Bit-identical re-evaluation, also through the round-tripped tree.
    REQUIRE(evaluate(e, b) == value);
    REQUIRE(evaluate(back, b) == value);

    if (std::abs(value) > 1e8) continue;
    double dv = 0.0;
    double fd = 0.0;
    try {
      dv = evaluate(differentiate_u(e), b);
      fd = fd_u(e, b, 1e-6);
    } catch (const EvalError&) {
      continue;
    }
    if (std::abs(dv) > 1e8) continue;
    ++fd_checked;
    CHECK_THAT(fd, Catch::Matchers::WithinAbs(dv, 1e-6 * (1.0 + std::abs(dv)) +
                                                      1e-4 * std::abs(dv)));
  }
  // The generator must exercise the derivative path on a solid majority.
  CHECK(fd_checked > 600);
}
