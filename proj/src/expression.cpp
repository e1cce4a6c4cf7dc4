#include "wps/expression.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <stdexcept>
#include <utility>

#include "wps/errors.hpp"

namespace wps {

std::string_view to_string(Operation op) {
  switch (op) {
    case Operation::Add: return "Add";
    case Operation::Sub: return "Sub";
    case Operation::Mul: return "Mul";
    case Operation::Div: return "Div";
    case Operation::DivReverse: return "DivReverse";
  }
  return "?";
}

char symbol(Operation op) {
  switch (op) {
    case Operation::Add: return '+';
    case Operation::Sub: return '-';
    case Operation::Mul: return '*';
    case Operation::Div:
    case Operation::DivReverse: return '/';
  }
  return '?';
}

Expression Expression::leaf(std::size_t quantity) {
  if (quantity >= kMaxQuantities) throw std::invalid_argument("quantity index exceeds 63");
  auto node = std::make_shared<Node>();
  node->quantity = quantity;
  node->mask = LeafMask{1} << quantity;
  node->leaves = 1;
  return Expression(std::move(node));
}

Expression Expression::combine(Operation op, Expression left, Expression right) {
  if (left.empty() || right.empty()) throw std::invalid_argument("empty operand");
  if ((left.leaves() & right.leaves()) != 0) throw std::invalid_argument("operands share a quantity");
  auto node = std::make_shared<Node>();
  node->op = op;
  node->mask = left.leaves() | right.leaves();
  node->leaves = left.leaf_count() + right.leaf_count();
  node->left = std::move(left);
  node->right = std::move(right);
  return Expression(std::move(node));
}

bool Expression::is_leaf() const noexcept { return node_ && node_->left.empty(); }

std::size_t Expression::quantity() const {
  if (!is_leaf()) throw std::logic_error("quantity() on internal node");
  return node_->quantity;
}

Operation Expression::op() const {
  if (empty() || is_leaf()) throw std::logic_error("op() on leaf");
  return node_->op;
}

const Expression& Expression::left() const {
  if (empty() || is_leaf()) throw std::logic_error("left() on leaf");
  return node_->left;
}

const Expression& Expression::right() const {
  if (empty() || is_leaf()) throw std::logic_error("right() on leaf");
  return node_->right;
}

LeafMask Expression::leaves() const noexcept { return node_ ? node_->mask : 0; }
std::size_t Expression::leaf_count() const noexcept { return node_ ? node_->leaves : 0; }

bool operator==(const Expression& a, const Expression& b) {
  if (a.node_ == b.node_) return true;
  if (a.empty() || b.empty()) return false;
  if (a.is_leaf() || b.is_leaf()) return a.is_leaf() && b.is_leaf() && a.quantity() == b.quantity();
  return a.op() == b.op() && a.left() == b.left() && a.right() == b.right();
}

Rational evaluate(const Expression& expr, std::span<const Rational> values) {
  if (expr.is_leaf()) {
    if (expr.quantity() >= values.size()) throw std::out_of_range("leaf references a missing quantity");
    return values[expr.quantity()];
  }
  Rational l = evaluate(expr.left(), values);
  Rational r = evaluate(expr.right(), values);
  switch (expr.op()) {
    case Operation::Add: return l + r;
    case Operation::Sub: return l < r ? r - l : l - r;
    case Operation::Mul: return l * r;
    case Operation::Div: return l / r;
    case Operation::DivReverse: return r / l;
  }
  throw std::logic_error("bad operation");
}

std::multiset<Operation> op_multiset(const Expression& expr) {
  std::multiset<Operation> ops;
  if (expr.empty() || expr.is_leaf()) return ops;
  ops.insert(expr.op());
  ops.merge(op_multiset(expr.left()));
  ops.merge(op_multiset(expr.right()));
  return ops;
}

std::string canonical_form(const Expression& expr) {
  if (expr.is_leaf()) return "[" + std::to_string(expr.quantity()) + "]";
  std::string l = canonical_form(expr.left());
  std::string r = canonical_form(expr.right());
  switch (expr.op()) {
    case Operation::Add:
    case Operation::Sub:
    case Operation::Mul:
      if (r < l) std::swap(l, r);
      return "(" + l + symbol(expr.op()) + r + ")";
    case Operation::Div: return "(" + l + "/" + r + ")";
    case Operation::DivReverse: return "(" + r + "/" + l + ")";
  }
  throw std::logic_error("bad operation");
}

bool expressions_equivalent(const Expression& a, const Expression& b, std::span<const Rational> values) {
  evaluate(a, values);
  evaluate(b, values);
  return canonical_form(a) == canonical_form(b);
}

namespace {

std::string render_impl(const Expression& expr, std::span<const Rational> values, bool top) {
  if (expr.is_leaf()) {
    std::string out;
    if (!values.empty()) out = values[expr.quantity()].to_string();
    return out + "[" + std::to_string(expr.quantity() + 1) + "]";
  }
  const Expression* l = &expr.left();
  const Expression* r = &expr.right();
  if (expr.op() == Operation::DivReverse) std::swap(l, r);
  std::string body = render_impl(*l, values, false) + symbol(expr.op()) + render_impl(*r, values, false);
  return top ? body : "(" + body + ")";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ParsedExpression run() {
    ParsedExpression out;
    out.expr = expr(out);
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return out;
  }

 private:
  Expression expr(ParsedExpression& out) {
    Expression lhs = term(out);
    for (;;) {
      skip_space();
      if (accept('+')) {
        lhs = Expression::combine(Operation::Add, lhs, term(out));
      } else if (accept('-')) {
        lhs = Expression::combine(Operation::Sub, lhs, term(out));
      } else {
        return lhs;
      }
    }
  }

  Expression term(ParsedExpression& out) {
    Expression lhs = factor(out);
    for (;;) {
      skip_space();
      if (accept('*') || accept('x')) {
        lhs = Expression::combine(Operation::Mul, lhs, factor(out));
      } else if (accept('/')) {
        lhs = Expression::combine(Operation::Div, lhs, factor(out));
      } else {
        return lhs;
      }
    }
  }

  Expression factor(ParsedExpression& out) {
    skip_space();
    if (accept('(')) {
      Expression e = expr(out);
      skip_space();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == ','))
      ++pos_;
    std::string_view number = text_.substr(start, pos_ - start);
    skip_space();
    if (!accept('[')) fail("expected '[index]'");
    std::size_t istart = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (istart == pos_) fail("expected index digits");
    std::size_t index = std::stoul(std::string(text_.substr(istart, pos_ - istart)));
    if (!accept(']')) fail("expected ']'");
    if (index == 0) fail("subscripts are 1-based");
    std::size_t q = index - 1;
    try {
      Expression leaf = Expression::leaf(q);
      if (!number.empty()) {
        auto value = Rational::parse(number);
        if (!value) fail("bad number '" + std::string(number) + "'");
        if (auto [it, fresh] = out.leaf_values.emplace(q, *value); !fresh) fail("subscript used twice");
      } else if (out.leaf_values.count(q)) {
        fail("subscript used twice");
      }
      return leaf;
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("expression '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string render(const Expression& expr, std::span<const Rational> values) { return render_impl(expr, values, true); }

std::string render_indices(const Expression& expr) { return render_impl(expr, {}, true); }

ParsedExpression parse_expression(std::string_view text) {
  try {
    return Parser(text).run();
  } catch (const std::invalid_argument& e) {
    // Expression::combine rejects a subscript that appears twice.
    throw ParseError("expression '" + std::string(text) + "': " + e.what());
  }
}

Expression normalize_division(const Expression& expr) {
  if (expr.is_leaf()) return expr;
  Expression l = normalize_division(expr.left());
  Expression r = normalize_division(expr.right());
  if (expr.op() == Operation::DivReverse) return Expression::combine(Operation::Div, r, l);
  return Expression::combine(expr.op(), l, r);
}

}  // namespace wps
