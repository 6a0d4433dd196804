#include "pmon/stl.hpp"
#include "pmon/text.hpp"

namespace pmon::stl {

namespace {

bool is_zero_const(const Expr& e) { return e->op == ExprNode::Op::Const && e->value == 0.0; }

std::string interval(int a, int b) { return "[" + std::to_string(a) + "," + std::to_string(b) + "]"; }

}  // namespace

std::string to_string(const Expr& e) {
  using Op = ExprNode::Op;
  switch (e->op) {
    case Op::Const: return format_double(e->value);
    case Op::Var: return "x" + std::to_string(e->var);
    case Op::Add: return "(" + to_string(e->lhs) + " + " + to_string(e->rhs) + ")";
    case Op::Sub: return "(" + to_string(e->lhs) + " - " + to_string(e->rhs) + ")";
    case Op::Mul: return "(" + to_string(e->lhs) + " * " + to_string(e->rhs) + ")";
    case Op::Min: return "min(" + to_string(e->lhs) + ", " + to_string(e->rhs) + ")";
    case Op::Max: return "max(" + to_string(e->lhs) + ", " + to_string(e->rhs) + ")";
    case Op::Neg: return "-(" + to_string(e->lhs) + ")";
    case Op::Abs: return "abs(" + to_string(e->lhs) + ")";
    case Op::Sqrt: return "sqrt(" + to_string(e->lhs) + ")";
  }
  return "?";
}

std::string to_string(const Formula& f) {
  using Kind = FormulaNode::Kind;
  switch (f->kind) {
    case Kind::True: return "true";
    case Kind::AtomCont: {
      const Expr& g = f->expr;
      // (l - r) with a non-zero literal r prints as `l > r`; everything else as `g > 0`.
      if (g->op == ExprNode::Op::Sub && !is_zero_const(g->rhs)) {
        return to_string(g->lhs) + " > " + to_string(g->rhs);
      }
      return to_string(g) + " > 0";
    }
    case Kind::AtomLoc: return "loc==" + std::to_string(f->mode);
    case Kind::Not: return "!(" + to_string(f->left) + ")";
    case Kind::And: return "(" + to_string(f->left) + " & " + to_string(f->right) + ")";
    case Kind::Or: return "(" + to_string(f->left) + " | " + to_string(f->right) + ")";
    case Kind::Until:
      return "(" + to_string(f->left) + " U" + interval(f->a, f->b) + " " + to_string(f->right) + ")";
    case Kind::Eventually: return "F" + interval(f->a, f->b) + "(" + to_string(f->left) + ")";
    case Kind::Always: return "G" + interval(f->a, f->b) + "(" + to_string(f->left) + ")";
  }
  return "?";
}

}  // namespace pmon::stl
