#include <cmath>
#include <limits>

#include "pmon/simd.hpp"
#include "pmon/stl.hpp"

namespace pmon::stl {

namespace {

using Kind = FormulaNode::Kind;
using Column = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Arithmetic columns over the first n samples of the signal.
Column expr_column(const Expr& e, const Signal& s, std::size_t n, const simd::KernelTable& k) {
  using Op = ExprNode::Op;
  Column out(n);
  switch (e->op) {
    case Op::Const: std::fill(out.begin(), out.end(), e->value); return out;
    case Op::Var: {
      if (static_cast<std::size_t>(e->var) >= s.dim()) {
        throw std::out_of_range("variable x" + std::to_string(e->var) + " out of range for signal dimension " +
                                std::to_string(s.dim()));
      }
      for (std::size_t i = 0; i < n; ++i) out[i] = s.value(i, e->var);
      return out;
    }
    case Op::Neg: {
      Column a = expr_column(e->lhs, s, n, k);
      for (std::size_t i = 0; i < n; ++i) out[i] = -a[i];
      return out;
    }
    case Op::Abs: {
      Column a = expr_column(e->lhs, s, n, k);
      for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(a[i]);
      return out;
    }
    case Op::Sqrt: {
      Column a = expr_column(e->lhs, s, n, k);
      for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(a[i]);
      return out;
    }
    default: break;
  }
  Column a = expr_column(e->lhs, s, n, k);
  Column b = expr_column(e->rhs, s, n, k);
  switch (e->op) {
    case Op::Add: k.vadd(a.data(), b.data(), out.data(), n); break;
    case Op::Sub: k.vsub(a.data(), b.data(), out.data(), n); break;
    case Op::Mul: k.vmul(a.data(), b.data(), out.data(), n); break;
    case Op::Min: k.vmin(a.data(), b.data(), out.data(), n); break;
    case Op::Max: k.vmax(a.data(), b.data(), out.data(), n); break;
    default: break;
  }
  return out;
}

// One evaluator for both semantics: Boolean values live in {0,1} with
// negation 1 - x, robustness uses negation -x; conjunction is min and the
// temporal operators are sliding max/min in both cases.
class ColumnEval {
 public:
  ColumnEval(const Signal& s, bool boolean)
      : s_(s), boolean_(boolean), k_(simd::active()),
        top_(boolean ? 1.0 : kSentinel), bottom_(boolean ? 0.0 : -kSentinel) {}

  // Values at t = 0 .. size() - 1 - horizon(f).
  Column eval(const Formula& f) {
    const std::size_t n = s_.size() - horizon(f);
    switch (f->kind) {
      case Kind::True: return Column(n, top_);
      case Kind::AtomCont: {
        Column g = expr_column(f->expr, s_, n, k_);
        if (boolean_) k_.vstep(g.data(), 0.0, g.data(), n);
        return g;
      }
      case Kind::AtomLoc: {
        Column out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = s_.mode(i) == f->mode ? top_ : bottom_;
        return out;
      }
      case Kind::Not: {
        Column c = eval(f->left);
        c.resize(n);
        k_.vaffine(-1.0, boolean_ ? 1.0 : 0.0, c.data(), c.data(), n);
        return c;
      }
      case Kind::And:
      case Kind::Or: {
        Column l = eval(f->left);
        Column r = eval(f->right);
        Column out(n);
        if (f->kind == Kind::And) {
          k_.vmin(l.data(), r.data(), out.data(), n);
        } else {
          k_.vmax(l.data(), r.data(), out.data(), n);
        }
        return out;
      }
      case Kind::Eventually:
      case Kind::Always: {
        Column c = eval(f->left);
        Column out(c.begin() + f->a, c.begin() + f->a + n);
        auto op = f->kind == Kind::Eventually ? k_.vmax : k_.vmin;
        for (int j = f->a + 1; j <= f->b; ++j) op(out.data(), c.data() + j, out.data(), n);
        return out;
      }
      case Kind::Until: return until_column(f, n);
    }
    return {};
  }

 private:
  // sup_{k in [a,b]} min(r(t+k), inf_{j in [0,k)} l(t+j)); the empty infimum is +inf.
  Column until_column(const Formula& f, std::size_t n) {
    Column l = eval(f->left);
    Column r = eval(f->right);
    Column prefix(n, kInf);
    Column acc(n, -kInf);
    Column term(n);
    for (int j = 0; j <= f->b; ++j) {
      if (j > 0) k_.vmin(prefix.data(), l.data() + (j - 1), prefix.data(), n);
      if (j >= f->a) {
        k_.vmin(r.data() + j, prefix.data(), term.data(), n);
        k_.vmax(acc.data(), term.data(), acc.data(), n);
      }
    }
    return acc;
  }

  const Signal& s_;
  bool boolean_;
  const simd::KernelTable& k_;
  double top_;
  double bottom_;
};

void check_evaluable(const Formula& f, const Signal& s, std::size_t t) {
  if (s.empty()) throw std::invalid_argument("cannot evaluate on an empty signal");
  const std::size_t h = static_cast<std::size_t>(horizon(f));
  if (t + h > s.size() - 1) {
    throw HorizonError("formula horizon " + std::to_string(h) + " from t=" + std::to_string(t) +
                       " exceeds signal of " + std::to_string(s.size()) + " samples");
  }
}

}  // namespace

std::vector<double> boolean_signal(const Formula& f, const Signal& s) {
  check_evaluable(f, s, 0);
  return ColumnEval(s, true).eval(f);
}

std::vector<double> robustness_signal(const Formula& f, const Signal& s) {
  check_evaluable(f, s, 0);
  return ColumnEval(s, false).eval(f);
}

bool eval_boolean(const Formula& f, const Signal& s, std::size_t t) {
  check_evaluable(f, s, t);
  return ColumnEval(s, true).eval(f)[t] > 0.5;
}

double eval_space_robustness(const Formula& f, const Signal& s, std::size_t t) {
  check_evaluable(f, s, t);
  return ColumnEval(s, false).eval(f)[t];
}

double eval_time_robustness(const Formula& f, const Signal& s, std::size_t t, RobustnessKind side) {
  if (side != RobustnessKind::TimeLeft && side != RobustnessKind::TimeRight) {
    throw std::invalid_argument("time robustness side must be time-left or time-right");
  }
  check_evaluable(f, s, t);
  const Column chi = ColumnEval(s, true).eval(f);
  const double c = chi[t];
  std::size_t d = 0;
  if (side == RobustnessKind::TimeRight) {
    while (t + d + 1 < chi.size() && chi[t + d + 1] == c) ++d;
  } else {
    while (d < t && chi[t - d - 1] == c) ++d;
  }
  const double sign = c > 0.5 ? 1.0 : -1.0;
  return sign * (static_cast<double>(d) * s.dt());
}

double eval(const Formula& f, const Signal& s, std::size_t t, RobustnessKind kind) {
  switch (kind) {
    case RobustnessKind::Boolean: return eval_boolean(f, s, t) ? 1.0 : 0.0;
    case RobustnessKind::Space: return eval_space_robustness(f, s, t);
    case RobustnessKind::TimeLeft:
    case RobustnessKind::TimeRight: return eval_time_robustness(f, s, t, kind);
  }
  return 0.0;
}

}  // namespace pmon::stl
