#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "wps/rational.hpp"

namespace wps {

/// DivReverse divides the right operand by the left one. Sub is unordered:
/// it evaluates to the larger operand minus the smaller.
enum class Operation : std::uint8_t { Add, Sub, Mul, Div, DivReverse };

std::string_view to_string(Operation op);
char symbol(Operation op);

/// Bit i is set when quantity i is a leaf of the tree. Because leaves are
/// distinct, the mask identifies an internal node within one expression.
using LeafMask = std::uint64_t;
inline constexpr std::size_t kMaxQuantities = 64;

/// Immutable binary expression tree over quantity indices. Copies share nodes.
class Expression {
 public:
  /// Empty placeholder; only assignment and empty() are valid on it.
  Expression() = default;

  static Expression leaf(std::size_t quantity);
  /// Throws std::invalid_argument when the operands share a quantity.
  static Expression combine(Operation op, Expression left, Expression right);

  bool empty() const noexcept { return node_ == nullptr; }
  bool is_leaf() const noexcept;
  std::size_t quantity() const;  ///< leaf only
  Operation op() const;          ///< internal node only
  const Expression& left() const;
  const Expression& right() const;
  LeafMask leaves() const noexcept;
  std::size_t leaf_count() const noexcept;
  std::size_t internal_count() const noexcept { return leaf_count() - 1; }

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  struct Node;
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expression::Node {
  Operation op = Operation::Add;
  std::size_t quantity = 0;
  LeafMask mask = 0;
  std::size_t leaves = 1;
  Expression left, right;  // empty for leaves
};

/// Evaluates with the magnitude rule for Sub. Throws DivisionByZero.
Rational evaluate(const Expression& expr, std::span<const Rational> values);

std::multiset<Operation> op_multiset(const Expression& expr);

/// Canonical text used for equivalence: commutative operands sorted, Sub
/// operands sorted, DivReverse rewritten as Div with swapped operands.
std::string canonical_form(const Expression& expr);

/// Equal canonical forms. Both sides are evaluated first so that division by
/// zero propagates.
bool expressions_equivalent(const Expression& a, const Expression& b, std::span<const Rational> values);

/// Fully parenthesized infix with 1-based subscripts, e.g. "(16[1]+14[2])/5[3]".
/// DivReverse is printed as a Div with its operands swapped.
std::string render(const Expression& expr, std::span<const Rational> values);

/// Same as render, without values: "([1]+[2])/[3]".
std::string render_indices(const Expression& expr);

/// Result of parsing the infix format. Leaf values are optional in the text
/// ("16[1]" or "[1]"); indices are converted to 0-based.
struct ParsedExpression {
  Expression expr;
  std::map<std::size_t, Rational> leaf_values;
};

/// Grammar:
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | 'x' | '/') factor)*
///   factor := '(' expr ')' | [number] '[' index ']'
/// Operators of equal precedence associate to the left. Throws ParseError.
ParsedExpression parse_expression(std::string_view text);

/// Replaces every DivReverse node by a Div node with swapped operands.
Expression normalize_division(const Expression& expr);

}  // namespace wps
