#pragma once

#include <rouf/error.hpp>

#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <string>

namespace rouf::stl {

/// Arithmetic expression over signal names. Immutable, cheap to copy.
class Expr {
 public:
  enum class Kind { kNumber, kSignal, kNeg, kAdd, kSub, kMul, kDiv };

  static Expr number(double v) { return Expr(Node{Kind::kNumber, v, {}, {}, {}}); }
  static Expr signal(std::string name) { return Expr(Node{Kind::kSignal, 0.0, std::move(name), {}, {}}); }

  /// Negation; literals fold into a negative literal.
  static Expr neg(const Expr& e) {
    if (e.kind() == Kind::kNumber) return number(-e.value());
    return Expr(Node{Kind::kNeg, 0.0, {}, e.node_, {}});
  }

  static Expr binary(Kind kind, const Expr& lhs, const Expr& rhs) {
    if (kind == Kind::kNumber || kind == Kind::kSignal || kind == Kind::kNeg) {
      throw ConfigError("not a binary expression kind");
    }
    return Expr(Node{kind, 0.0, {}, lhs.node_, rhs.node_});
  }

  Kind kind() const noexcept { return node_->kind; }
  double value() const noexcept { return node_->value; }
  const std::string& name() const noexcept { return node_->name; }
  Expr operand() const { return Expr(node_->lhs); }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }

  bool is_zero_literal() const noexcept { return kind() == Kind::kNumber && value() == 0.0; }

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case Kind::kNumber: return a.value() == b.value();
      case Kind::kSignal: return a.name() == b.name();
      case Kind::kNeg: return a.operand() == b.operand();
      default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    }
  }

 private:
  struct Node {
    Kind kind;
    double value;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

/// Closed, bounded, non-singular time interval [lo, hi] with 0 <= lo < hi.
struct Interval {
  double lo;
  double hi;

  static Interval make(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0 || !(lo < hi)) {
      throw DomainError("interval must satisfy 0 <= lo < hi");
    }
    return {lo, hi};
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Normalized predicate g(w(t)) >= 0, or > 0 when `strict`. Robustness is g.
struct Predicate {
  Expr g;
  bool strict = false;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// STL formula. Or/Eventually/Globally are kept as sugar; see expand().
/// A temporal node without an interval is unbounded and is evaluated up to the trace horizon.
class Formula {
 public:
  enum class Op { kTrue, kFalse, kPred, kNot, kAnd, kOr, kUntil, kEventually, kGlobally };

  static Formula top() { return Formula(Node{Op::kTrue, {}, {}, {}, {}}); }
  static Formula bottom() { return Formula(Node{Op::kFalse, {}, {}, {}, {}}); }
  static Formula pred(Predicate p) { return Formula(Node{Op::kPred, std::move(p), {}, {}, {}}); }
  static Formula pred(Expr g, bool strict = false) { return pred(Predicate{std::move(g), strict}); }
  static Formula negate(const Formula& f) { return Formula(Node{Op::kNot, {}, {}, f.node_, {}}); }
  static Formula conj(const Formula& a, const Formula& b) { return Formula(Node{Op::kAnd, {}, {}, a.node_, b.node_}); }
  static Formula disj(const Formula& a, const Formula& b) { return Formula(Node{Op::kOr, {}, {}, a.node_, b.node_}); }
  static Formula until(const Formula& a, const Formula& b, std::optional<Interval> i = std::nullopt) {
    return Formula(Node{Op::kUntil, {}, i, a.node_, b.node_});
  }
  static Formula eventually(const Formula& f, std::optional<Interval> i = std::nullopt) {
    return Formula(Node{Op::kEventually, {}, i, f.node_, {}});
  }
  static Formula globally(const Formula& f, std::optional<Interval> i = std::nullopt) {
    return Formula(Node{Op::kGlobally, {}, i, f.node_, {}});
  }

  Op op() const noexcept { return node_->op; }
  const Predicate& predicate() const { return *node_->pred; }
  const std::optional<Interval>& interval() const noexcept { return node_->interval; }
  bool unbounded() const noexcept { return is_temporal() && !node_->interval; }
  bool is_temporal() const noexcept {
    return op() == Op::kUntil || op() == Op::kEventually || op() == Op::kGlobally;
  }

  /// Sole operand of Not/F/G; left operand of And/Or/Until.
  Formula left() const { return Formula(node_->left); }
  Formula right() const { return Formula(node_->right); }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op() || a.interval() != b.interval()) return false;
    switch (a.op()) {
      case Op::kTrue:
      case Op::kFalse: return true;
      case Op::kPred: return a.predicate() == b.predicate();
      case Op::kNot:
      case Op::kEventually:
      case Op::kGlobally: return a.left() == b.left();
      default: return a.left() == b.left() && a.right() == b.right();
    }
  }

 private:
  struct Node {
    Op op;
    std::optional<Predicate> pred;
    std::optional<Interval> interval;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  explicit Formula(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  std::shared_ptr<const Node> node_;
};

/// Rewrites sugar into the core grammar (pred, not, and, until):
///   a | b = !(!a & !b),  F_I f = true U_I f,  G_I f = !F_I !f.
inline Formula expand(const Formula& f) {
  using Op = Formula::Op;
  switch (f.op()) {
    case Op::kTrue:
    case Op::kFalse:
    case Op::kPred: return f;
    case Op::kNot: return Formula::negate(expand(f.left()));
    case Op::kAnd: return Formula::conj(expand(f.left()), expand(f.right()));
    case Op::kOr:
      return Formula::negate(
          Formula::conj(Formula::negate(expand(f.left())), Formula::negate(expand(f.right()))));
    case Op::kUntil: return Formula::until(expand(f.left()), expand(f.right()), f.interval());
    case Op::kEventually: return Formula::until(Formula::top(), expand(f.left()), f.interval());
    case Op::kGlobally:
      return Formula::negate(Formula::until(Formula::top(), Formula::negate(expand(f.left())), f.interval()));
  }
  return f;
}

namespace detail {

inline std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void collect_signals(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case Expr::Kind::kNumber: return;
    case Expr::Kind::kSignal: out.insert(e.name()); return;
    case Expr::Kind::kNeg: collect_signals(e.operand(), out); return;
    default:
      collect_signals(e.lhs(), out);
      collect_signals(e.rhs(), out);
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::kNumber: return detail::number_text(e.value());
    case K::kSignal: return e.name();
    case K::kNeg: return "-" + to_string(e.operand());
    default: break;
  }
  const char* op = e.kind() == K::kAdd ? " + " : e.kind() == K::kSub ? " - " : e.kind() == K::kMul ? " * " : " / ";
  return "(" + to_string(e.lhs()) + op + to_string(e.rhs()) + ")";
}

inline std::string to_string(const Interval& i) {
  return "[" + detail::number_text(i.lo) + "," + detail::number_text(i.hi) + "]";
}

/// Canonical concrete syntax; parse(to_string(f)) == f.
inline std::string to_string(const Formula& f) {
  using Op = Formula::Op;
  auto iv = [&] { return f.interval() ? to_string(*f.interval()) : std::string(); };
  switch (f.op()) {
    case Op::kTrue: return "true";
    case Op::kFalse: return "false";
    case Op::kPred: return to_string(f.predicate().g) + (f.predicate().strict ? " > 0" : " >= 0");
    case Op::kNot: return "!(" + to_string(f.left()) + ")";
    case Op::kAnd: return "(" + to_string(f.left()) + ") & (" + to_string(f.right()) + ")";
    case Op::kOr: return "(" + to_string(f.left()) + ") | (" + to_string(f.right()) + ")";
    case Op::kUntil: return "(" + to_string(f.left()) + ") U" + iv() + " (" + to_string(f.right()) + ")";
    case Op::kEventually: return "F" + iv() + "(" + to_string(f.left()) + ")";
    case Op::kGlobally: return "G" + iv() + "(" + to_string(f.left()) + ")";
  }
  return {};
}

/// Names of all signals referenced by predicates in `f`.
inline std::set<std::string> signal_names(const Formula& f) {
  std::set<std::string> out;
  auto walk = [&](auto&& self, const Formula& g) -> void {
    switch (g.op()) {
      case Formula::Op::kTrue:
      case Formula::Op::kFalse: return;
      case Formula::Op::kPred: detail::collect_signals(g.predicate().g, out); return;
      case Formula::Op::kNot:
      case Formula::Op::kEventually:
      case Formula::Op::kGlobally: self(self, g.left()); return;
      default:
        self(self, g.left());
        self(self, g.right());
    }
  };
  walk(walk, f);
  return out;
}

}  // namespace rouf::stl
