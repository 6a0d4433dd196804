#include <algorithm>
#include <cmath>

#include "pmon/stl.hpp"

namespace pmon::stl {

Signal::Signal(double dt, std::size_t dim) : dt_(dt), dim_(dim) {
  if (!(dt > 0.0)) throw std::invalid_argument("signal time step must be positive");
}

Signal::Signal(double dt, std::size_t dim, std::vector<ModeId> modes, std::vector<double> values)
    : dt_(dt), dim_(dim), modes_(std::move(modes)), values_(std::move(values)) {
  if (!(dt > 0.0)) throw std::invalid_argument("signal time step must be positive");
  if (values_.size() != modes_.size() * dim_) {
    throw std::invalid_argument("signal values do not match modes x dim");
  }
}

Signal Signal::from_rows(double dt, const std::vector<std::vector<double>>& rows, ModeId mode) {
  if (rows.empty()) throw std::invalid_argument("signal must be non-empty");
  Signal s(dt, rows.front().size());
  for (const auto& r : rows) s.push_back(mode, r);
  return s;
}

void Signal::push_back(ModeId mode, std::span<const double> values) {
  if (values.size() != dim_) {
    throw std::invalid_argument("sample dimension " + std::to_string(values.size()) +
                                " != signal dimension " + std::to_string(dim_));
  }
  modes_.push_back(mode);
  values_.insert(values_.end(), values.begin(), values.end());
}

std::vector<double> Signal::column(std::size_t k) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i * dim_ + k];
  return out;
}

Signal Signal::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw std::out_of_range("signal slice out of range");
  std::vector<ModeId> m(modes_.begin() + first, modes_.begin() + first + count);
  std::vector<double> v(values_.begin() + first * dim_, values_.begin() + (first + count) * dim_);
  return Signal(dt_, dim_, std::move(m), std::move(v));
}

// --- expressions -------------------------------------------------------------

Expr constant(double v) { return std::make_shared<ExprNode>(ExprNode{ExprNode::Op::Const, v, -1, {}, {}}); }

Expr var(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  return std::make_shared<ExprNode>(ExprNode{ExprNode::Op::Var, 0.0, index, {}, {}});
}

Expr binary(ExprNode::Op op, Expr lhs, Expr rhs) {
  return std::make_shared<ExprNode>(ExprNode{op, 0.0, -1, std::move(lhs), std::move(rhs)});
}

Expr unary(ExprNode::Op op, Expr operand) {
  return std::make_shared<ExprNode>(ExprNode{op, 0.0, -1, std::move(operand), {}});
}

double eval_expr(const Expr& e, std::span<const double> v) {
  using Op = ExprNode::Op;
  switch (e->op) {
    case Op::Const: return e->value;
    case Op::Var:
      if (static_cast<std::size_t>(e->var) >= v.size()) {
        throw std::out_of_range("variable x" + std::to_string(e->var) + " out of range for dimension " +
                                std::to_string(v.size()));
      }
      return v[e->var];
    case Op::Add: return eval_expr(e->lhs, v) + eval_expr(e->rhs, v);
    case Op::Sub: return eval_expr(e->lhs, v) - eval_expr(e->rhs, v);
    case Op::Mul: return eval_expr(e->lhs, v) * eval_expr(e->rhs, v);
    case Op::Min: {
      double a = eval_expr(e->lhs, v), b = eval_expr(e->rhs, v);
      return a < b ? a : b;
    }
    case Op::Max: {
      double a = eval_expr(e->lhs, v), b = eval_expr(e->rhs, v);
      return a > b ? a : b;
    }
    case Op::Neg: return -eval_expr(e->lhs, v);
    case Op::Abs: return std::abs(eval_expr(e->lhs, v));
    case Op::Sqrt: return std::sqrt(eval_expr(e->lhs, v));
  }
  return 0.0;
}

bool equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b || a->op != b->op) return false;
  using Op = ExprNode::Op;
  switch (a->op) {
    case Op::Const:
      // bitwise so that -0.0 and 0.0 stay distinct through a round trip
      return std::signbit(a->value) == std::signbit(b->value) && a->value == b->value;
    case Op::Var: return a->var == b->var;
    case Op::Neg:
    case Op::Abs:
    case Op::Sqrt: return equal(a->lhs, b->lhs);
    default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
}

// --- formulas ------------------------------------------------------------------

namespace {

using Kind = FormulaNode::Kind;

Formula node(Kind k, Formula l = {}, Formula r = {}, int a = 0, int b = 0) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  n->left = std::move(l);
  n->right = std::move(r);
  n->a = a;
  n->b = b;
  return n;
}

void check_interval(int a, int b) {
  if (a < 0 || b < 0) throw std::invalid_argument("temporal bounds must be non-negative");
  if (a > b) throw std::invalid_argument("inverted temporal interval");
}

}  // namespace

Formula make_true() { return node(Kind::True); }

Formula atom(Expr g) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::AtomCont;
  n->expr = std::move(g);
  return n;
}

Formula loc(ModeId mode) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::AtomLoc;
  n->mode = mode;
  return n;
}

Formula negation(Formula f) { return node(Kind::Not, std::move(f)); }
Formula conjunction(Formula l, Formula r) { return node(Kind::And, std::move(l), std::move(r)); }
Formula disjunction(Formula l, Formula r) { return node(Kind::Or, std::move(l), std::move(r)); }

Formula until(int a, int b, Formula l, Formula r) {
  check_interval(a, b);
  return node(Kind::Until, std::move(l), std::move(r), a, b);
}

Formula eventually(int a, int b, Formula f) {
  check_interval(a, b);
  return node(Kind::Eventually, std::move(f), {}, a, b);
}

Formula always(int a, int b, Formula f) {
  check_interval(a, b);
  return node(Kind::Always, std::move(f), {}, a, b);
}

bool equal(const Formula& x, const Formula& y) {
  if (x == y) return true;
  if (!x || !y || x->kind != y->kind) return false;
  switch (x->kind) {
    case Kind::True: return true;
    case Kind::AtomCont: return equal(x->expr, y->expr);
    case Kind::AtomLoc: return x->mode == y->mode;
    case Kind::Not: return equal(x->left, y->left);
    case Kind::And:
    case Kind::Or: return equal(x->left, y->left) && equal(x->right, y->right);
    case Kind::Until:
      return x->a == y->a && x->b == y->b && equal(x->left, y->left) && equal(x->right, y->right);
    case Kind::Eventually:
    case Kind::Always: return x->a == y->a && x->b == y->b && equal(x->left, y->left);
  }
  return false;
}

int horizon(const Formula& f) {
  switch (f->kind) {
    case Kind::True:
    case Kind::AtomCont:
    case Kind::AtomLoc: return 0;
    case Kind::Not: return horizon(f->left);
    case Kind::And:
    case Kind::Or: return std::max(horizon(f->left), horizon(f->right));
    case Kind::Until: return f->b + std::max(horizon(f->left), horizon(f->right));
    case Kind::Eventually:
    case Kind::Always: return f->b + horizon(f->left);
  }
  return 0;
}

namespace {
int max_var(const Expr& e) {
  if (!e) return -1;
  if (e->op == ExprNode::Op::Var) return e->var;
  return std::max(max_var(e->lhs), max_var(e->rhs));
}
}  // namespace

int max_var_index(const Formula& f) {
  if (!f) return -1;
  int m = f->kind == Kind::AtomCont ? max_var(f->expr) : -1;
  return std::max({m, max_var_index(f->left), max_var_index(f->right)});
}

bool is_state_predicate(const Formula& f) {
  switch (f->kind) {
    case Kind::True:
    case Kind::AtomCont:
    case Kind::AtomLoc: return true;
    case Kind::Not: return is_state_predicate(f->left);
    case Kind::And:
    case Kind::Or: return is_state_predicate(f->left) && is_state_predicate(f->right);
    default: return false;
  }
}

Formula desugar(const Formula& f) {
  switch (f->kind) {
    case Kind::True:
    case Kind::AtomCont:
    case Kind::AtomLoc: return f;
    case Kind::Not: return negation(desugar(f->left));
    case Kind::And: return conjunction(desugar(f->left), desugar(f->right));
    case Kind::Or: return negation(conjunction(negation(desugar(f->left)), negation(desugar(f->right))));
    case Kind::Until: return until(f->a, f->b, desugar(f->left), desugar(f->right));
    case Kind::Eventually: return until(f->a, f->b, make_true(), desugar(f->left));
    case Kind::Always:
      return negation(until(f->a, f->b, make_true(), negation(desugar(f->left))));
  }
  return f;
}

bool holds_at(const Formula& f, ModeId mode, std::span<const double> v) {
  switch (f->kind) {
    case Kind::True: return true;
    case Kind::AtomCont: return eval_expr(f->expr, v) > 0.0;
    case Kind::AtomLoc: return mode == f->mode;
    case Kind::Not: return !holds_at(f->left, mode, v);
    case Kind::And: return holds_at(f->left, mode, v) && holds_at(f->right, mode, v);
    case Kind::Or: return holds_at(f->left, mode, v) || holds_at(f->right, mode, v);
    default: throw std::invalid_argument("temporal operator in a state predicate");
  }
}

std::string_view to_string(RobustnessKind k) {
  switch (k) {
    case RobustnessKind::Boolean: return "boolean";
    case RobustnessKind::Space: return "space";
    case RobustnessKind::TimeLeft: return "time-left";
    case RobustnessKind::TimeRight: return "time-right";
  }
  return "?";
}

RobustnessKind parse_robustness_kind(std::string_view s) {
  if (s == "boolean") return RobustnessKind::Boolean;
  if (s == "space") return RobustnessKind::Space;
  if (s == "time-left") return RobustnessKind::TimeLeft;
  if (s == "time-right") return RobustnessKind::TimeRight;
  throw std::invalid_argument("unknown semantics '" + std::string(s) +
                              "' (expected boolean|space|time-left|time-right)");
}

}  // namespace pmon::stl
