#include "sellab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "sellab/error.hpp"

namespace sellab::expr {

int arity(Op op) noexcept {
  switch (op) {
    case Op::Const:
    case Op::Var:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return 2;
    default:
      return 1;
  }
}

std::string_view op_name(Op op) noexcept {
  switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "t";
    case Op::Neg: return "neg";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "^";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Atan: return "atan";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
  }
  return "?";
}

Expr constant(double v) { return std::make_shared<const Node>(Node{Op::Const, v, {}}); }

Expr variable() {
  static const Expr var = std::make_shared<const Node>(Node{Op::Var, 0.0, {}});
  return var;
}

Expr make_unary(Op op, Expr a) {
  return std::make_shared<const Node>(Node{op, 0.0, {std::move(a), nullptr}});
}

Expr make_binary(Op op, Expr a, Expr b) {
  return std::make_shared<const Node>(Node{op, 0.0, {std::move(a), std::move(b)}});
}

bool is_constant(const Expr& e, double v) { return e->op == Op::Const && e->value == v; }

Expr add(Expr a, Expr b) {
  if (is_constant(b, 0.0)) return a;
  if (is_constant(a, 0.0)) return b;
  return make_binary(Op::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
  if (is_constant(b, 0.0)) return a;
  return make_binary(Op::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
  if (is_constant(a, 0.0) || is_constant(b, 0.0)) return constant(0.0);
  if (is_constant(b, 1.0)) return a;
  if (is_constant(a, 1.0)) return b;
  return make_binary(Op::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b) { return make_binary(Op::Div, std::move(a), std::move(b)); }
Expr pow(Expr a, Expr b) { return make_binary(Op::Pow, std::move(a), std::move(b)); }
Expr neg(Expr a) { return make_unary(Op::Neg, std::move(a)); }

// ---------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : src_(s) {}

  Expr run() {
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected character", pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Op::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Op::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = make_binary(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    if (accept('-')) return make_unary(Op::Neg, factor());
    Expr base = atom();
    if (accept('^')) return make_binary(Op::Pow, base, factor());
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string_view id = src_.substr(start, pos_ - start);
      if (id == "t") return variable();
      static constexpr std::array<std::pair<std::string_view, Op>, 7> funcs{{
          {"exp", Op::Exp},
          {"ln", Op::Ln},
          {"sqrt", Op::Sqrt},
          {"abs", Op::Abs},
          {"atan", Op::Atan},
          {"sin", Op::Sin},
          {"cos", Op::Cos},
      }};
      for (const auto& [name, op] : funcs) {
        if (id == name) {
          expect('(');
          Expr arg = expr();
          expect(')');
          return make_unary(op, arg);
        }
      }
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    const std::string text(src_.substr(start, pos_ - start));
    return constant(std::strtod(text.c_str(), nullptr));
  }
};

}  // namespace

Expr parse(std::string_view source) { return Parser(source).run(); }

// ------------------------------------------------------------ evaluation

namespace {

// Non-owning view of a node for error messages.
std::string node_text(const Node* n) { return to_string(Expr(Expr{}, n)); }

double apply_unary(Op op, double a, const Node* node, double t) {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Exp: return std::exp(a);
    case Op::Ln:
      if (!(a > 0.0)) throw DomainError("ln(" + to_string(node->kids[0]) + ")", t);
      return std::log(a);
    case Op::Sqrt:
      if (!(a >= 0.0)) throw DomainError("sqrt(" + to_string(node->kids[0]) + ")", t);
      return std::sqrt(a);
    case Op::Abs: return std::fabs(a);
    case Op::Atan: return std::atan(a);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    default: break;
  }
  return 0.0;
}

double apply_binary(Op op, double a, double b, const Node* node, double t) {
  double r = 0.0;
  switch (op) {
    case Op::Add: r = a + b; break;
    case Op::Sub: r = a - b; break;
    case Op::Mul: r = a * b; break;
    case Op::Div:
      if (b == 0.0) throw DomainError(node_text(node), t);
      r = a / b;
      break;
    case Op::Pow:
      if (a < 0.0 && std::trunc(b) != b) {
        throw DomainError(node_text(node), t);
      }
      if (a == 0.0 && b < 0.0) throw DomainError(node_text(node), t);
      r = std::pow(a, b);
      break;
    default: break;
  }
  if (std::isnan(r)) throw DomainError(node_text(node), t);
  return r;
}

}  // namespace

double evaluate(const Expr& e, double t) {
  switch (e->op) {
    case Op::Const: return e->value;
    case Op::Var: return t;
    default: break;
  }
  if (arity(e->op) == 1) {
    const double r = apply_unary(e->op, evaluate(e->kids[0], t), e.get(), t);
    if (std::isnan(r)) throw DomainError(to_string(e), t);
    return r;
  }
  return apply_binary(e->op, evaluate(e->kids[0], t), evaluate(e->kids[1], t), e.get(), t);
}

Tape::Tape(const Expr& e) : root_(e) {
  std::size_t depth_now = 0;
  std::function<void(const Expr&)> emit = [&](const Expr& n) {
    for (int i = 0; i < arity(n->op); ++i) emit(n->kids[i]);
    if (arity(n->op) == 0) {
      ++depth_now;
      max_stack_ = std::max(max_stack_, depth_now);
    } else if (arity(n->op) == 2) {
      --depth_now;
    }
    code_.push_back({n->op, n->value, n.get()});
  };
  emit(e);
}

double Tape::operator()(double t) const {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_stack_ > kInline) {
    big.resize(max_stack_);
    stack = big.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : code_) {
    switch (arity(in.op)) {
      case 0:
        stack[sp++] = in.op == Op::Const ? in.value : t;
        break;
      case 1: {
        const double r = apply_unary(in.op, stack[sp - 1], in.node, t);
        if (std::isnan(r)) throw DomainError(node_text(in.node), t);
        stack[sp - 1] = r;
        break;
      }
      default: {
        const double b = stack[--sp];
        stack[sp - 1] = apply_binary(in.op, stack[sp - 1], b, in.node, t);
        break;
      }
    }
  }
  return stack[0];
}

// -------------------------------------------------------- differentiation

Expr differentiate(const Expr& e) {
  const Expr& u = e->kids[0];
  const Expr& v = e->kids[1];
  switch (e->op) {
    case Op::Const: return constant(0.0);
    case Op::Var: return constant(1.0);
    case Op::Neg: {
      Expr du = differentiate(u);
      return is_constant(du, 0.0) ? du : neg(du);
    }
    case Op::Add: return add(differentiate(u), differentiate(v));
    case Op::Sub: {
      Expr du = differentiate(u);
      Expr dv = differentiate(v);
      if (is_constant(du, 0.0) && !is_constant(dv, 0.0)) return neg(dv);
      return sub(du, dv);
    }
    case Op::Mul: return add(mul(differentiate(u), v), mul(u, differentiate(v)));
    case Op::Div: {
      Expr du = differentiate(u);
      Expr dv = differentiate(v);
      if (is_constant(dv, 0.0)) return is_constant(du, 0.0) ? du : div(du, v);
      return div(sub(mul(du, v), mul(u, dv)), pow(v, constant(2.0)));
    }
    case Op::Pow: {
      Expr du = differentiate(u);
      Expr dv = differentiate(v);
      if (is_constant(dv, 0.0)) {
        if (is_constant(du, 0.0)) return constant(0.0);
        if (v->op == Op::Const) {
          return mul(mul(constant(v->value), pow(u, constant(v->value - 1.0))), du);
        }
        return mul(mul(v, pow(u, sub(v, constant(1.0)))), du);
      }
      // u^v (v' ln u + v u'/u)
      Expr inner = mul(dv, make_unary(Op::Ln, u));
      if (!is_constant(du, 0.0)) inner = add(inner, div(mul(v, du), u));
      return mul(e, inner);
    }
    case Op::Exp: return mul(e, differentiate(u));
    case Op::Ln: return div(differentiate(u), u);
    case Op::Sqrt: {
      Expr du = differentiate(u);
      if (is_constant(du, 0.0)) return du;
      return div(du, mul(constant(2.0), e));
    }
    case Op::Abs: return mul(div(u, e), differentiate(u));
    case Op::Atan: {
      Expr du = differentiate(u);
      if (is_constant(du, 0.0)) return du;
      return div(du, add(constant(1.0), pow(u, constant(2.0))));
    }
    case Op::Sin: return mul(make_unary(Op::Cos, u), differentiate(u));
    case Op::Cos: {
      Expr du = differentiate(u);
      if (is_constant(du, 0.0)) return du;
      return mul(neg(make_unary(Op::Sin, u)), du);
    }
  }
  return constant(0.0);
}

Expr substitute(const Expr& body, const Expr& replacement) {
  switch (arity(body->op)) {
    case 0: return body->op == Op::Var ? replacement : body;
    case 1: return make_unary(body->op, substitute(body->kids[0], replacement));
    default:
      return make_binary(body->op, substitute(body->kids[0], replacement),
                         substitute(body->kids[1], replacement));
  }
}

Expr log_expand(const Expr& e) {
  switch (e->op) {
    case Op::Exp: return e->kids[0];
    case Op::Mul: return add(log_expand(e->kids[0]), log_expand(e->kids[1]));
    case Op::Div: return sub(log_expand(e->kids[0]), log_expand(e->kids[1]));
    case Op::Pow: return mul(e->kids[1], log_expand(e->kids[0]));
    case Op::Sqrt: return mul(constant(0.5), log_expand(e->kids[0]));
    case Op::Const:
      if (e->value > 0.0) return constant(std::log(e->value));
      break;
    default: break;
  }
  return make_unary(Op::Ln, e);
}

// ---------------------------------------------------------------- printer

std::string to_string(const Expr& e) {
  switch (e->op) {
    case Op::Const: {
      char buf[40];
      if (e->value < 0.0) {
        std::snprintf(buf, sizeof buf, "(-%.17g)", -e->value);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", e->value);
      }
      return buf;
    }
    case Op::Var: return "t";
    case Op::Neg: return "(-" + to_string(e->kids[0]) + ")";
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return "(" + to_string(e->kids[0]) + std::string(op_name(e->op)) + to_string(e->kids[1]) +
             ")";
    default: return std::string(op_name(e->op)) + "(" + to_string(e->kids[0]) + ")";
  }
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a->op != b->op) return false;
  if (a->op == Op::Const) return a->value == b->value;
  for (int i = 0; i < arity(a->op); ++i) {
    if (!structurally_equal(a->kids[i], b->kids[i])) return false;
  }
  return true;
}

std::size_t depth(const Expr& e) {
  std::size_t d = 0;
  for (int i = 0; i < arity(e->op); ++i) d = std::max(d, depth(e->kids[i]));
  return d + 1;
}

// --------------------------------------------------------------- ScalarFn

ScalarFn::ScalarFn(Expr body, double lo, double hi) : state_(std::make_shared<State>()) {
  state_->tape = Tape(body);
  state_->body = std::move(body);
  state_->lo = lo;
  state_->hi = hi;
}

ScalarFn ScalarFn::parse(std::string_view source, double lo, double hi) {
  return ScalarFn(expr::parse(source), lo, hi);
}

const ScalarFn& ScalarFn::derivative() const {
  std::call_once(state_->deriv_once, [this] {
    state_->deriv =
        std::make_unique<ScalarFn>(differentiate(state_->body), state_->lo, state_->hi);
  });
  return *state_->deriv;
}

}  // namespace sellab::expr
