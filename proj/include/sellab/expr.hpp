#pragma once

// Scalar expressions in the single free variable `t`: parsing, evaluation,
// symbolic differentiation and a canonical printer.
//
// Grammar (bytes, whitespace ignored between tokens):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | atom ('^' factor)?
//   atom   := number | 't' | func '(' expr ')' | '(' expr ')'
//   func   := exp | ln | sqrt | abs | atan | sin | cos
// '^' is right-associative and binds tighter than unary minus, so "-t^2"
// parses as -(t^2).

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace sellab::expr {

enum class Op : std::uint8_t {
  Const,
  Var,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Exp,
  Ln,
  Sqrt,
  Abs,
  Atan,
  Sin,
  Cos,
};

int arity(Op op) noexcept;
std::string_view op_name(Op op) noexcept;

struct Node;
/// Immutable, shareable expression tree.
using Expr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // only for Op::Const
  std::array<Expr, 2> kids{};
};

Expr constant(double v);
Expr variable();
Expr make_unary(Op op, Expr a);
Expr make_binary(Op op, Expr a, Expr b);

// Builders with the folding identities x+0 -> x, x-0 -> x, x*0 -> 0 and
// x*1 -> x (in either operand order where it is symmetric). Nothing else is
// simplified.
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr a, Expr b);
Expr neg(Expr a);

Expr parse(std::string_view source);

/// Reference tree-walking evaluator. Throws DomainError instead of producing
/// NaN: ln/sqrt of negative arguments, division by zero, negative base with
/// non-integer exponent. Overflow to +/-inf is allowed.
double evaluate(const Expr& e, double t);

Expr differentiate(const Expr& e);

/// Replace every occurrence of the variable by `replacement`.
Expr substitute(const Expr& body, const Expr& replacement);

/// ln(e) rewritten with ln(exp a) = a, ln(ab) = ln a + ln b, ln(a/b),
/// ln(a^b) = b ln a and ln(sqrt a). Valid where every factor is positive;
/// used to evaluate logarithms of functions that underflow.
Expr log_expand(const Expr& e);

/// Canonical, fully parenthesized text. Re-parsing yields a structurally
/// equal tree for any tree produced by `parse`.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);
std::size_t depth(const Expr& e);

bool is_constant(const Expr& e, double v);

/// Flattened postfix program for fast repeated evaluation.
class Tape {
 public:
  Tape() = default;
  explicit Tape(const Expr& e);
  double operator()(double t) const;

 private:
  struct Instr {
    Op op;
    double value;
    const Node* node;
  };
  std::vector<Instr> code_;
  std::size_t max_stack_ = 0;
  Expr root_;
};

/// Parsed function together with its (lazily built) exact derivative and
/// an advisory open domain (lo, hi).
class ScalarFn {
 public:
  ScalarFn() = default;
  explicit ScalarFn(Expr body, double lo = -std::numeric_limits<double>::infinity(),
                    double hi = std::numeric_limits<double>::infinity());
  static ScalarFn parse(std::string_view source,
                        double lo = -std::numeric_limits<double>::infinity(),
                        double hi = std::numeric_limits<double>::infinity());

  double operator()(double t) const { return state_->tape(t); }
  const Expr& body() const { return state_->body; }
  const ScalarFn& derivative() const;
  double lo() const { return state_->lo; }
  double hi() const { return state_->hi; }
  std::string to_string() const { return expr::to_string(state_->body); }
  bool valid() const { return static_cast<bool>(state_); }

 private:
  struct State {
    Expr body;
    Tape tape;
    double lo;
    double hi;
    mutable std::once_flag deriv_once;
    mutable std::unique_ptr<ScalarFn> deriv;
  };
  std::shared_ptr<State> state_;
};

}  // namespace sellab::expr
