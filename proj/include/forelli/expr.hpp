#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forelli/series.hpp"

namespace forelli {

/// A complex-valued function on C^n, the common currency between modules.
using ScalarField = std::function<Complex(const Point&)>;

/// Names an expression may refer to, mapped onto argument slots.
///
/// Scalar names occupy slots 0..size-1 in declaration order. Vector names
/// (only meaningful inside normsq) stand for a list of slots.
struct VariableTable {
  std::vector<std::string> scalars;
  std::map<std::string, std::vector<int>> vectors;
  /// Prefix of indexed names such as "z" in z1..zn, for range diagnostics.
  std::string indexed_prefix;
  int indexed_count = 0;

  /// z1..zn and the vector symbol z.
  static VariableTable coordinates(int n);
  /// l (the disc parameter), u1..un and the vector symbol u.
  static VariableTable pencil(int n);

  int slot(std::string_view name) const;
  int size() const noexcept { return static_cast<int>(scalars.size()); }
};

/// Immutable expression tree over complex arithmetic, stored in postorder.
///
/// Built-ins: conj, re, im, exp (one argument) and normsq(<vector symbol>).
class Expr {
public:
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Conj, Re, Im, Exp, NormSq };

  struct Node {
    Op op = Op::Const;
    int lhs = -1;
    int rhs = -1;
    Complex value{};
    int exponent = 0;
    int slot = -1;
    std::vector<int> slots;
    /// Variable or vector symbol name, kept for printing.
    std::string name;
  };

  static Expr parse(std::string_view text, const VariableTable& vars);
  /// Shorthand for parse(text, VariableTable::coordinates(n)).
  static Expr parse(std::string_view text, int n);

  /// Number of argument slots the expression was parsed against.
  int arity() const noexcept { return arity_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  /// Throws EvalError on a zero denominator.
  Complex eval(const Point& args) const;
  Complex operator()(const Point& args) const { return eval(args); }

  /// Fully parenthesized text that re-parses to an equivalent tree.
  std::string to_string() const;
  std::string to_string(int node) const;

  ScalarField field() const;

private:
  Expr(std::vector<Node> nodes, int arity) : nodes_(std::move(nodes)), arity_(arity) {}

  std::vector<Node> nodes_;
  int arity_ = 0;

  friend class ExprParser;
};

}  // namespace forelli
