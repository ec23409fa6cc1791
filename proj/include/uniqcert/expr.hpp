#ifndef UNIQCERT_EXPR_HPP
#define UNIQCERT_EXPR_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "uniqcert/errors.hpp"

namespace uniqcert {

enum class ExprKind { Constant, Variable, Unary, Binary, Call };
enum class ExprOp { Neg, Add, Sub, Mul, Div, Pow };
enum class ExprFunc { Sin, Cos, Exp, Log, Sqrt, Abs };

/// Variables are indexed x=0, y=1, z=2, u=3.
inline constexpr int kVarX = 0;
inline constexpr int kVarY = 1;
inline constexpr int kVarZ = 2;
inline constexpr int kVarU = 3;

inline char variable_name(int var) { return "xyzu"[var]; }

/// Immutable expression tree. Values are safe to share read-only across
/// threads once built.
struct Expr {
  ExprKind kind = ExprKind::Constant;
  ExprOp op = ExprOp::Neg;
  ExprFunc func = ExprFunc::Sin;
  double value = 0.0;
  int var = 0;
  std::vector<Expr> kids;

  static Expr constant(double v) {
    Expr e;
    e.kind = ExprKind::Constant;
    e.value = v;
    return e;
  }
  static Expr variable(int var) {
    Expr e;
    e.kind = ExprKind::Variable;
    e.var = var;
    return e;
  }
  static Expr unary(ExprOp op, Expr kid) {
    Expr e;
    e.kind = ExprKind::Unary;
    e.op = op;
    e.kids.push_back(std::move(kid));
    return e;
  }
  static Expr binary(ExprOp op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.op = op;
    e.kids.push_back(std::move(lhs));
    e.kids.push_back(std::move(rhs));
    return e;
  }
  static Expr call(ExprFunc func, Expr arg) {
    Expr e;
    e.kind = ExprKind::Call;
    e.func = func;
    e.kids.push_back(std::move(arg));
    return e;
  }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case ExprKind::Constant:
        if (a.value != b.value) return false;
        break;
      case ExprKind::Variable:
        if (a.var != b.var) return false;
        break;
      case ExprKind::Unary:
      case ExprKind::Binary:
        if (a.op != b.op) return false;
        break;
      case ExprKind::Call:
        if (a.func != b.func) return false;
        break;
    }
    if (a.kids.size() != b.kids.size()) return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
      if (!(a.kids[i] == b.kids[i])) return false;
    return true;
  }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
};

/// Pre-order traversal over every node.
template <class Fn>
void for_each_node(const Expr& e, Fn&& fn) {
  fn(e);
  for (const Expr& kid : e.kids) for_each_node(kid, fn);
}

inline bool uses_variable(const Expr& e, int var) {
  bool found = false;
  for_each_node(e, [&](const Expr& node) {
    if (node.kind == ExprKind::Variable && node.var == var) found = true;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Binding {
  std::array<double, 4> values{};
  std::array<bool, 4> bound{};

  Binding& set(int var, double v) {
    values[static_cast<std::size_t>(var)] = v;
    bound[static_cast<std::size_t>(var)] = true;
    return *this;
  }
  static Binding all(double x, double y, double z, double u) {
    Binding b;
    b.set(kVarX, x).set(kVarY, y).set(kVarZ, z).set(kVarU, u);
    return b;
  }
};

namespace detail {

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite value in ") + what);
  return v;
}

/// Integer-exponent fast path: exact repeated multiplication for |e| <= 64.
inline double eval_pow(double base, double exponent) {
  const bool integral =
      exponent == std::floor(exponent) && std::abs(exponent) <= 64.0;
  if (integral) {
    long long n = static_cast<long long>(exponent);
    if (n == 0) return 1.0;
    if (n < 0) {
      if (base == 0.0) throw EvalError("division by zero in power");
      return checked(1.0 / eval_pow(base, static_cast<double>(-n)), "power");
    }
    double acc = 1.0;
    double square = base;
    for (long long k = n; k > 0; k >>= 1) {
      if (k & 1) acc *= square;
      if (k > 1) square *= square;
    }
    return checked(acc, "power");
  }
  if (base < 0.0) throw EvalError("fractional power of negative base");
  if (base == 0.0 && exponent < 0.0) throw EvalError("division by zero in power");
  return checked(std::pow(base, exponent), "power");
}

}  // namespace detail

inline double evaluate(const Expr& e, const Binding& b) {
  switch (e.kind) {
    case ExprKind::Constant:
      return detail::checked(e.value, "constant");
    case ExprKind::Variable: {
      const auto i = static_cast<std::size_t>(e.var);
      if (!b.bound[i])
        throw EvalError(std::string("unbound variable '") +
                        variable_name(e.var) + "'");
      return detail::checked(b.values[i], "binding");
    }
    case ExprKind::Unary:
      return -evaluate(e.kids[0], b);
    case ExprKind::Binary: {
      const double lhs = evaluate(e.kids[0], b);
      const double rhs = evaluate(e.kids[1], b);
      switch (e.op) {
        case ExprOp::Add: return detail::checked(lhs + rhs, "addition");
        case ExprOp::Sub: return detail::checked(lhs - rhs, "subtraction");
        case ExprOp::Mul: return detail::checked(lhs * rhs, "multiplication");
        case ExprOp::Div:
          if (rhs == 0.0) throw EvalError("division by zero");
          return detail::checked(lhs / rhs, "division");
        case ExprOp::Pow: return detail::eval_pow(lhs, rhs);
        case ExprOp::Neg: break;
      }
      throw EvalError("malformed expression node");
    }
    case ExprKind::Call: {
      const double arg = evaluate(e.kids[0], b);
      switch (e.func) {
        case ExprFunc::Sin: return detail::checked(std::sin(arg), "sin");
        case ExprFunc::Cos: return detail::checked(std::cos(arg), "cos");
        case ExprFunc::Exp: return detail::checked(std::exp(arg), "exp");
        case ExprFunc::Log:
          if (arg <= 0.0) throw EvalError("log of non-positive value");
          return detail::checked(std::log(arg), "log");
        case ExprFunc::Sqrt:
          if (arg < 0.0) throw EvalError("sqrt of negative value");
          return detail::checked(std::sqrt(arg), "sqrt");
        case ExprFunc::Abs: return std::abs(arg);
      }
      throw EvalError("malformed expression node");
    }
  }
  throw EvalError("malformed expression node");
}

// ---------------------------------------------------------------------------
// Parsing
//
// Grammar, with ^ binding tighter than unary minus:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ("-")? power
//   power  := atom ("^" factor)?
//   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
// A unary minus directly on a number literal (not followed by "^") folds to
// a negative constant so printed constants round-trip structurally.

namespace detail {

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  TokKind kind = TokKind::End;
  double number = 0.0;
  std::string ident;
  std::size_t pos = 0;
};

inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    Token tok;
    tok.pos = i;
    if ((c >= '0' && c <= '9') ||
        (c == '.' && i + 1 < n && text[i + 1] >= '0' && text[i + 1] <= '9')) {
      std::size_t j = i;
      while (j < n && text[j] >= '0' && text[j] <= '9') ++j;
      if (j < n && text[j] == '.') {
        ++j;
        while (j < n && text[j] >= '0' && text[j] <= '9') ++j;
      }
      if (j < n && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < n && text[k] >= '0' && text[k] <= '9') {
          while (k < n && text[k] >= '0' && text[k] <= '9') ++k;
          j = k;
        }
      }
      double value = 0.0;
      const auto res = std::from_chars(text.data() + i, text.data() + j, value);
      if (res.ec != std::errc{} || res.ptr != text.data() + j ||
          !std::isfinite(value))
        throw ParseError("invalid number literal", i);
      tok.kind = TokKind::Number;
      tok.number = value;
      i = j;
    } else if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      std::size_t j = i;
      while (j < n && is_ident_char(text[j])) ++j;
      tok.kind = TokKind::Ident;
      tok.ident = text.substr(i, j - i);
      i = j;
    } else {
      switch (c) {
        case '+': tok.kind = TokKind::Plus; break;
        case '-': tok.kind = TokKind::Minus; break;
        case '*': tok.kind = TokKind::Star; break;
        case '/': tok.kind = TokKind::Slash; break;
        case '^': tok.kind = TokKind::Caret; break;
        case '(': tok.kind = TokKind::LParen; break;
        case ')': tok.kind = TokKind::RParen; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", i);
      }
      ++i;
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokKind::End;
  end.pos = n;
  out.push_back(std::move(end));
  return out;
}

struct Parser {
  const std::vector<Token>& toks;
  std::size_t at = 0;

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = at + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Token& take() { return toks[at++]; }
  bool accept(TokKind kind) {
    if (peek().kind != kind) return false;
    ++at;
    return true;
  }
  void expect(TokKind kind, const char* what) {
    if (!accept(kind))
      throw ParseError(std::string("expected ") + what, peek().pos);
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (true) {
      if (accept(TokKind::Plus))
        lhs = Expr::binary(ExprOp::Add, std::move(lhs), parse_term());
      else if (accept(TokKind::Minus))
        lhs = Expr::binary(ExprOp::Sub, std::move(lhs), parse_term());
      else
        return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    while (true) {
      if (accept(TokKind::Star))
        lhs = Expr::binary(ExprOp::Mul, std::move(lhs), parse_factor());
      else if (accept(TokKind::Slash))
        lhs = Expr::binary(ExprOp::Div, std::move(lhs), parse_factor());
      else
        return lhs;
    }
  }

  Expr parse_factor() {
    if (accept(TokKind::Minus)) {
      if (peek().kind == TokKind::Number && peek(1).kind != TokKind::Caret) {
        const Token& tok = take();
        return Expr::constant(-tok.number);
      }
      return Expr::unary(ExprOp::Neg, parse_power());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept(TokKind::Caret))
      return Expr::binary(ExprOp::Pow, std::move(base), parse_factor());
    return base;
  }

  Expr parse_atom() {
    const Token& tok = peek();
    switch (tok.kind) {
      case TokKind::Number:
        take();
        return Expr::constant(tok.number);
      case TokKind::LParen: {
        take();
        Expr inner = parse_expr();
        expect(TokKind::RParen, "')'");
        return inner;
      }
      case TokKind::Ident: {
        take();
        const std::string& name = tok.ident;
        if (name.size() == 1) {
          const char* vars = "xyzu";
          for (int v = 0; v < 4; ++v)
            if (name[0] == vars[v]) return Expr::variable(v);
        }
        ExprFunc func;
        if (name == "sin") func = ExprFunc::Sin;
        else if (name == "cos") func = ExprFunc::Cos;
        else if (name == "exp") func = ExprFunc::Exp;
        else if (name == "log") func = ExprFunc::Log;
        else if (name == "sqrt") func = ExprFunc::Sqrt;
        else if (name == "abs") func = ExprFunc::Abs;
        else
          throw ParseError("unknown identifier '" + name + "'", tok.pos);
        expect(TokKind::LParen, "'(' after function name");
        Expr arg = parse_expr();
        expect(TokKind::RParen, "')'");
        return Expr::call(func, std::move(arg));
      }
      default:
        throw ParseError("expected number, variable, function, or '('",
                         tok.pos);
    }
  }
};

}  // namespace detail

inline Expr parse(const std::string& text) {
  const std::vector<detail::Token> toks = detail::tokenize(text);
  detail::Parser parser{toks};
  Expr root = parser.parse_expr();
  if (parser.peek().kind != detail::TokKind::End)
    throw ParseError("unexpected trailing input", parser.peek().pos);
  return root;
}

// ---------------------------------------------------------------------------
// Printing
//
// print(e) emits a string that parses back to a structurally equal tree.
// Precedence levels: add/sub 1, mul/div 2, unary minus 3, pow 4, atom 5.

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Constant: return std::signbit(e.value) ? 3 : 5;
    case ExprKind::Variable:
    case ExprKind::Call: return 5;
    case ExprKind::Unary: return 3;
    case ExprKind::Binary:
      switch (e.op) {
        case ExprOp::Add:
        case ExprOp::Sub: return 1;
        case ExprOp::Mul:
        case ExprOp::Div: return 2;
        case ExprOp::Pow: return 4;
        default: return 5;
      }
  }
  return 5;
}

inline std::string number_to_string(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void print_node(const Expr& e, std::string& out);

inline void print_child(const Expr& kid, bool parens, std::string& out) {
  if (parens) {
    out += '(';
    print_node(kid, out);
    out += ')';
  } else {
    print_node(kid, out);
  }
}

inline void print_node(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Constant:
      out += number_to_string(e.value);
      return;
    case ExprKind::Variable:
      out += variable_name(e.var);
      return;
    case ExprKind::Unary: {
      // A bare constant after '-' would re-lex as one negative literal.
      const Expr& kid = e.kids[0];
      out += '-';
      print_child(kid,
                  precedence(kid) < 4 || kid.kind == ExprKind::Constant, out);
      return;
    }
    case ExprKind::Call: {
      switch (e.func) {
        case ExprFunc::Sin: out += "sin"; break;
        case ExprFunc::Cos: out += "cos"; break;
        case ExprFunc::Exp: out += "exp"; break;
        case ExprFunc::Log: out += "log"; break;
        case ExprFunc::Sqrt: out += "sqrt"; break;
        case ExprFunc::Abs: out += "abs"; break;
      }
      out += '(';
      print_node(e.kids[0], out);
      out += ')';
      return;
    }
    case ExprKind::Binary: {
      const Expr& lhs = e.kids[0];
      const Expr& rhs = e.kids[1];
      if (e.op == ExprOp::Pow) {
        print_child(lhs, precedence(lhs) <= 4, out);
        out += '^';
        print_child(rhs, precedence(rhs) < 3, out);
        return;
      }
      const int prec = precedence(e);
      print_child(lhs, precedence(lhs) < prec, out);
      switch (e.op) {
        case ExprOp::Add: out += " + "; break;
        case ExprOp::Sub: out += " - "; break;
        case ExprOp::Mul: out += '*'; break;
        case ExprOp::Div: out += '/'; break;
        default: break;
      }
      print_child(rhs, precedence(rhs) <= prec, out);
      return;
    }
  }
}

}  // namespace detail

inline std::string print(const Expr& e) {
  std::string out;
  detail::print_node(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation
//
// Smart constructors fold all-literal subtrees and drop additive/
// multiplicative neutral elements; everything else stays symbolic.

namespace detail {

inline bool is_const(const Expr& e, double v) {
  return e.kind == ExprKind::Constant && e.value == v;
}

inline Expr fold_or(Expr e) {
  bool literal = true;
  for (const Expr& kid : e.kids)
    if (kid.kind != ExprKind::Constant) literal = false;
  if (literal && e.kind != ExprKind::Constant) {
    try {
      return Expr::constant(evaluate(e, Binding{}));
    } catch (const EvalError&) {
      // Undefined at this literal point; keep the symbolic node.
    }
  }
  return e;
}

inline Expr mk_neg(Expr a) {
  if (is_const(a, 0.0)) return Expr::constant(0.0);
  return fold_or(Expr::unary(ExprOp::Neg, std::move(a)));
}

inline Expr mk_add(Expr a, Expr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return fold_or(Expr::binary(ExprOp::Add, std::move(a), std::move(b)));
}

inline Expr mk_sub(Expr a, Expr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return mk_neg(std::move(b));
  return fold_or(Expr::binary(ExprOp::Sub, std::move(a), std::move(b)));
}

inline Expr mk_mul(Expr a, Expr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr::constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return fold_or(Expr::binary(ExprOp::Mul, std::move(a), std::move(b)));
}

inline Expr mk_div(Expr a, Expr b) {
  if (is_const(a, 0.0)) return Expr::constant(0.0);
  if (is_const(b, 1.0)) return a;
  return fold_or(Expr::binary(ExprOp::Div, std::move(a), std::move(b)));
}

inline Expr mk_pow(Expr a, Expr b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(b, 0.0)) return Expr::constant(1.0);
  return fold_or(Expr::binary(ExprOp::Pow, std::move(a), std::move(b)));
}

inline Expr mk_call(ExprFunc func, Expr a) {
  return fold_or(Expr::call(func, std::move(a)));
}

inline Expr diff_u(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Constant:
      return Expr::constant(0.0);
    case ExprKind::Variable:
      return Expr::constant(e.var == kVarU ? 1.0 : 0.0);
    case ExprKind::Unary:
      return mk_neg(diff_u(e.kids[0]));
    case ExprKind::Binary: {
      const Expr& a = e.kids[0];
      const Expr& b = e.kids[1];
      switch (e.op) {
        case ExprOp::Add: return mk_add(diff_u(a), diff_u(b));
        case ExprOp::Sub: return mk_sub(diff_u(a), diff_u(b));
        case ExprOp::Mul:
          return mk_add(mk_mul(diff_u(a), b), mk_mul(a, diff_u(b)));
        case ExprOp::Div:
          // da/b - a*db/b^2 keeps the result short when db vanishes.
          return mk_sub(mk_div(diff_u(a), b),
                        mk_div(mk_mul(a, diff_u(b)),
                               mk_pow(b, Expr::constant(2.0))));
        case ExprOp::Pow: {
          if (b.kind == ExprKind::Constant) {
            Expr scaled = mk_mul(Expr::constant(b.value),
                                 mk_pow(a, Expr::constant(b.value - 1.0)));
            return mk_mul(std::move(scaled), diff_u(a));
          }
          if (a.kind == ExprKind::Constant) {
            Expr rate = mk_mul(mk_call(ExprFunc::Log, a), diff_u(b));
            return mk_mul(Expr::binary(ExprOp::Pow, a, b), std::move(rate));
          }
          Expr log_part = mk_mul(diff_u(b), mk_call(ExprFunc::Log, a));
          Expr ratio_part = mk_div(mk_mul(b, diff_u(a)), a);
          return mk_mul(Expr::binary(ExprOp::Pow, a, b),
                        mk_add(std::move(log_part), std::move(ratio_part)));
        }
        case ExprOp::Neg: break;
      }
      throw EvalError("malformed expression node");
    }
    case ExprKind::Call: {
      const Expr& a = e.kids[0];
      switch (e.func) {
        case ExprFunc::Sin:
          return mk_mul(mk_call(ExprFunc::Cos, a), diff_u(a));
        case ExprFunc::Cos:
          return mk_mul(mk_neg(mk_call(ExprFunc::Sin, a)), diff_u(a));
        case ExprFunc::Exp:
          return mk_mul(mk_call(ExprFunc::Exp, a), diff_u(a));
        case ExprFunc::Log:
          return mk_div(diff_u(a), a);
        case ExprFunc::Sqrt:
          return mk_div(diff_u(a),
                        mk_mul(Expr::constant(2.0), mk_call(ExprFunc::Sqrt, a)));
        case ExprFunc::Abs:
          throw NonDifferentiableError("abs is not differentiable");
      }
      throw EvalError("malformed expression node");
    }
  }
  throw EvalError("malformed expression node");
}

}  // namespace detail

inline Expr differentiate_u(const Expr& e) { return detail::diff_u(e); }

}  // namespace uniqcert

#endif  // UNIQCERT_EXPR_HPP
