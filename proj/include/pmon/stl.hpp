#pragma once

// Signal temporal logic over uniformly sampled discrete-time hybrid signals.
//
// Temporal bounds are integer step counts. Boolean, space-robustness and
// left/right time-robustness semantics are provided. Evaluation works on whole
// signal columns bottom-up over the formula tree, so each node costs a few
// elementwise min/max passes (see simd.hpp).

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pmon::stl {

using ModeId = int;

// Robustness of location atoms and of `true`; finite so that downstream
// arithmetic never meets inf - inf.
inline constexpr double kSentinel = 1e9;

class Signal {
 public:
  Signal(double dt, std::size_t dim);
  // values are row-major, one row of `dim` reals per sample
  Signal(double dt, std::size_t dim, std::vector<ModeId> modes, std::vector<double> values);
  // Single-mode signal from per-step rows.
  static Signal from_rows(double dt, const std::vector<std::vector<double>>& rows, ModeId mode = 0);

  void push_back(ModeId mode, std::span<const double> values);

  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  std::size_t dim() const { return dim_; }
  double dt() const { return dt_; }
  ModeId mode(std::size_t i) const { return modes_[i]; }
  std::span<const double> values(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  double value(std::size_t i, std::size_t k) const { return values_[i * dim_ + k]; }
  const std::vector<ModeId>& modes() const { return modes_; }
  const std::vector<double>& raw_values() const { return values_; }
  std::vector<double> column(std::size_t k) const;
  // Samples [first, first + count).
  Signal slice(std::size_t first, std::size_t count) const;

 private:
  double dt_;
  std::size_t dim_;
  std::vector<ModeId> modes_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Arithmetic expressions inside continuous atoms.

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Op { Const, Var, Add, Sub, Mul, Min, Max, Neg, Abs, Sqrt };
  Op op;
  double value = 0.0;  // Const
  int var = -1;        // Var
  Expr lhs;            // unary operand / left operand
  Expr rhs;
};

Expr constant(double v);
Expr var(int index);
Expr binary(ExprNode::Op op, Expr lhs, Expr rhs);
Expr unary(ExprNode::Op op, Expr operand);
inline Expr operator+(Expr a, Expr b) { return binary(ExprNode::Op::Add, std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return binary(ExprNode::Op::Sub, std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return binary(ExprNode::Op::Mul, std::move(a), std::move(b)); }

double eval_expr(const Expr& e, std::span<const double> v);
bool equal(const Expr& a, const Expr& b);

// ---------------------------------------------------------------------------
// Formulas

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  enum class Kind { True, AtomCont, AtomLoc, Not, And, Or, Until, Eventually, Always };
  Kind kind;
  Expr expr;         // AtomCont: satisfied iff expr > 0
  ModeId mode = 0;   // AtomLoc
  Formula left;      // Not/Eventually/Always operand, left operand otherwise
  Formula right;
  int a = 0;         // temporal bounds in steps, 0 <= a <= b
  int b = 0;
};

Formula make_true();
Formula atom(Expr g);
Formula loc(ModeId mode);
Formula negation(Formula f);
Formula conjunction(Formula l, Formula r);
Formula disjunction(Formula l, Formula r);
Formula until(int a, int b, Formula l, Formula r);
Formula eventually(int a, int b, Formula f);
Formula always(int a, int b, Formula f);

bool equal(const Formula& a, const Formula& b);

// Number of future steps needed beyond t to evaluate the formula at t.
int horizon(const Formula& f);
// Largest variable index referenced, -1 if none.
int max_var_index(const Formula& f);
bool is_state_predicate(const Formula& f);

// Rewrite F, G and | into the core syntax (true, atoms, !, &, U).
Formula desugar(const Formula& f);

// ---------------------------------------------------------------------------
// Text form

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Grammar, loosest binding first:
//   formula := disj ('U' '[' a ',' b ']' formula)?
//   disj    := conj ('|' conj)*
//   conj    := unary ('&' unary)*
//   unary   := '!' unary | 'F' '[' a ',' b ']' unary | 'G' '[' a ',' b ']' unary | primary
//   primary := 'true' | 'loc' '==' (int | name) | '(' formula ')' | expr cmp expr
//   cmp     := '>' | '>=' | '<' | '<='
//   expr    := term (('+' | '-') term)*;  term := factor ('*' factor)*
//   factor  := number | 'x'<k> | '-' factor | '(' expr ')' | min(e,e) | max(e,e) | abs(e) | sqrt(e)
// `l > r` becomes the atom (l - r) > 0 and `l < r` the atom (r - l) > 0; a
// literal zero on the far side keeps the other side as-is.
Formula parse_formula(std::string_view text, std::span<const std::string> mode_names = {});

// Canonical text; parse_formula(to_string(f)) is structurally equal to f.
std::string to_string(const Formula& f);
std::string to_string(const Expr& e);

// ---------------------------------------------------------------------------
// Semantics

enum class RobustnessKind { Boolean, Space, TimeLeft, TimeRight };

std::string_view to_string(RobustnessKind k);
RobustnessKind parse_robustness_kind(std::string_view s);

class HorizonError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Values at every evaluable time index 0 .. size() - 1 - horizon(f).
// Boolean gives 0/1, Space gives robustness.
std::vector<double> boolean_signal(const Formula& f, const Signal& s);
std::vector<double> robustness_signal(const Formula& f, const Signal& s);

bool eval_boolean(const Formula& f, const Signal& s, std::size_t t);
double eval_space_robustness(const Formula& f, const Signal& s, std::size_t t);
// Signed shift in seconds: +/- d * dt with the sign of the satisfaction at t.
// d stops at the last (or first) evaluable index of the signal.
double eval_time_robustness(const Formula& f, const Signal& s, std::size_t t, RobustnessKind side);
double eval(const Formula& f, const Signal& s, std::size_t t, RobustnessKind kind);

// Pointwise truth of a temporal-free formula for one state; used for guards.
bool holds_at(const Formula& f, ModeId mode, std::span<const double> v);

}  // namespace pmon::stl
