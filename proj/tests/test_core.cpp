#include <doctest.h>

#include <functional>
#include <numeric>
#include <random>

#include "support.hpp"
#include "wps/errors.hpp"
#include "wps/expression.hpp"
#include "wps/rational.hpp"

using namespace wps;

namespace {

// Reference fraction arithmetic in __int128 with explicit reduction.
struct Frac {
  __int128 n, d;
};
Frac reduce(Frac f) {
  if (f.d < 0) f.n = -f.n, f.d = -f.d;
  __int128 a = f.n < 0 ? -f.n : f.n, b = f.d;
  while (b) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) f.n /= a, f.d /= a;
  return f;
}
bool same(const Rational& r, Frac f) {
  f = reduce(f);
  return r.numerator() == static_cast<std::int64_t>(f.n) && r.denominator() == static_cast<std::int64_t>(f.d);
}

// Independent evaluator over the tree shape, magnitude rule for Sub.
Frac eval_ref(const Expression& e, const std::vector<Rational>& v) {
  if (e.is_leaf()) return {v[e.quantity()].numerator(), v[e.quantity()].denominator()};
  Frac a = eval_ref(e.left(), v), b = eval_ref(e.right(), v);
  switch (e.op()) {
    case Operation::Add: return reduce({a.n * b.d + b.n * a.d, a.d * b.d});
    case Operation::Sub: {
      Frac d = reduce({a.n * b.d - b.n * a.d, a.d * b.d});
      if (d.n < 0) d.n = -d.n;
      return d;
    }
    case Operation::Mul: return reduce({a.n * b.n, a.d * b.d});
    case Operation::Div:
      if (b.n == 0) throw std::domain_error("zero divisor");
      return reduce({a.n * b.d, a.d * b.n});
    case Operation::DivReverse:
      if (a.n == 0) throw std::domain_error("zero divisor");
      return reduce({b.n * a.d, b.d * a.n});
  }
  return {0, 1};
}

Expression random_tree(std::mt19937_64& rng, std::vector<std::size_t> leaves) {
  if (leaves.size() == 1) return Expression::leaf(leaves[0]);
  std::size_t cut = 1 + rng() % (leaves.size() - 1);
  std::vector<std::size_t> l(leaves.begin(), leaves.begin() + cut), r(leaves.begin() + cut, leaves.end());
  static constexpr Operation ops[] = {Operation::Add, Operation::Sub, Operation::Mul, Operation::Div,
                                      Operation::DivReverse};
  return Expression::combine(ops[rng() % 5], random_tree(rng, l), random_tree(rng, r));
}

std::vector<std::size_t> shuffled_leaves(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("rational normalizes sign and common factors") {
    Rational r(6, -8);
    CHECK(r.numerator() == -3);
    CHECK(r.denominator() == 4);
    CHECK(Rational(0, 5) == Rational(0));
    CHECK_THROWS_AS(Rational(1, 0), DivisionByZero);
  }

  TEST_CASE("rational arithmetic agrees with 128-bit reference fractions") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 2000; ++i) {
      std::int64_t an = static_cast<std::int64_t>(rng() % 2001) - 1000, ad = 1 + rng() % 50;
      std::int64_t bn = static_cast<std::int64_t>(rng() % 2001) - 1000, bd = 1 + rng() % 50;
      Rational a(an, ad), b(bn, bd);
      CHECK(same(a + b, {(__int128)an * bd + (__int128)bn * ad, (__int128)ad * bd}));
      CHECK(same(a - b, {(__int128)an * bd - (__int128)bn * ad, (__int128)ad * bd}));
      CHECK(same(a * b, {(__int128)an * bn, (__int128)ad * bd}));
      if (bn != 0) {
        CHECK(same(a / b, {(__int128)an * bd, (__int128)ad * bn}));
        CHECK((a / b) * b == a);
      } else {
        CHECK_THROWS_AS(a / b, DivisionByZero);
      }
      CHECK((a + b) - b == a);
      CHECK(((a < b) == (a.to_double() < b.to_double()) || a.to_double() == b.to_double()));
    }
  }

  TEST_CASE("rational overflow is reported, not wrapped") {
    Rational big(INT64_MAX);
    CHECK_THROWS_AS(big + Rational(1), std::overflow_error);
    CHECK_THROWS_AS(big * Rational(2), std::overflow_error);
    CHECK(big * Rational(1, 2) == Rational(INT64_MAX, 2));
  }

  TEST_CASE("rational parse and print") {
    CHECK(Rational::parse("16") == Rational(16));
    CHECK(Rational::parse("3.5") == Rational(7, 2));
    CHECK(Rational::parse("1,000") == Rational(1000));
    CHECK(Rational::parse("-2") == Rational(-2));
    CHECK(Rational::parse("7/2") == Rational(7, 2));
    CHECK_FALSE(Rational::parse("abc"));
    CHECK_FALSE(Rational::parse("1/0"));
    CHECK(Rational(7, 2).to_string() == "3.5");
    CHECK(Rational(1, 3).to_string() == "1/3");
    CHECK(Rational(-1, 8).to_string() == "-0.125");
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
      Rational r(static_cast<std::int64_t>(rng() % 20001) - 10000, 1 + rng() % 64);
      CHECK(Rational::parse(r.to_string()) == r);
    }
  }

  TEST_CASE("expression evaluation matches the reference evaluator") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
      std::size_t n = 1 + rng() % 6;
      std::vector<Rational> values;
      for (std::size_t k = 0; k < n; ++k) values.emplace_back(1 + rng() % 40, 1 + rng() % 3);
      Expression e = random_tree(rng, shuffled_leaves(rng, n));
      Frac ref{0, 1};
      bool ref_div_zero = false;
      try {
        ref = eval_ref(e, values);
      } catch (const std::domain_error&) {
        ref_div_zero = true;
      }
      if (ref_div_zero) {
        CHECK_THROWS_AS(evaluate(e, values), DivisionByZero);
      } else {
        CHECK(same(evaluate(e, values), ref));
      }
      CHECK(e.leaf_count() == n);
      CHECK(e.leaves() == (LeafMask{1} << n) - 1);
    }
  }

  TEST_CASE("subtraction takes the magnitude of subtree values") {
    std::vector<Rational> v{Rational(3), Rational(10), Rational(2)};
    auto e = Expression::combine(Operation::Sub, Expression::leaf(0), Expression::leaf(1));
    CHECK(evaluate(e, v) == Rational(7));
    auto f = Expression::combine(Operation::Sub, e, Expression::leaf(2));
    CHECK(evaluate(f, v) == Rational(5));
  }

  TEST_CASE("combine rejects shared leaves") {
    CHECK_THROWS_AS(Expression::combine(Operation::Add, Expression::leaf(1), Expression::leaf(1)),
                    std::invalid_argument);
  }

  TEST_CASE("render and parse round trip modulo division orientation") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
      std::size_t n = 1 + rng() % 6;
      std::vector<Rational> values;
      for (std::size_t k = 0; k < n; ++k) values.emplace_back(1 + rng() % 99);
      Expression e = random_tree(rng, shuffled_leaves(rng, n));
      auto parsed = parse_expression(render(e, values));
      CHECK(parsed.expr == normalize_division(e));
      for (const auto& [idx, v] : parsed.leaf_values) CHECK(values[idx] == v);
      CHECK(parse_expression(render_indices(e)).expr == normalize_division(e));
      bool equivalent = false;
      try {
        equivalent = expressions_equivalent(e, normalize_division(e), values);
      } catch (const DivisionByZero&) {
        // A zero-valued subtraction under a division; both forms must agree on that.
        CHECK_THROWS_AS(evaluate(normalize_division(e), values), DivisionByZero);
        continue;
      }
      CHECK(equivalent);
    }
  }

  TEST_CASE("rendering uses 1-based subscripts and prints reverse division swapped") {
    std::vector<Rational> v{Rational(16), Rational(14), Rational(5)};
    auto sum = Expression::combine(Operation::Add, Expression::leaf(0), Expression::leaf(1));
    CHECK(render(Expression::combine(Operation::Div, sum, Expression::leaf(2)), v) == "(16[1]+14[2])/5[3]");
    CHECK(render(Expression::combine(Operation::DivReverse, Expression::leaf(2), sum), v) == "(16[1]+14[2])/5[3]");
    CHECK(render_indices(sum) == "[1]+[2]");
  }

  TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_expression("(1[1]+"), ParseError);
    CHECK_THROWS_AS(parse_expression("1[1]+2[1]"), std::exception);
    CHECK_THROWS_AS(parse_expression("1[0]"), ParseError);
    CHECK(parse_expression("2[1] x 3[2]").expr.op() == Operation::Mul);
  }

  TEST_CASE("equivalence ignores commutation and subtraction order only") {
    std::vector<Rational> v{Rational(8), Rational(2), Rational(3)};
    auto a = parse_expression("([1]+[2])*[3]").expr;
    auto b = parse_expression("[3]*([2]+[1])").expr;
    CHECK(expressions_equivalent(a, b, v));
    CHECK(expressions_equivalent(parse_expression("[1]-[2]").expr, parse_expression("[2]-[1]").expr, v));
    CHECK_FALSE(expressions_equivalent(parse_expression("[1]/[2]").expr, parse_expression("[2]/[1]").expr, v));
    CHECK_FALSE(expressions_equivalent(parse_expression("[1]+[2]").expr, parse_expression("[1]-[2]").expr, v));
    auto ops = op_multiset(a);
    CHECK(ops.count(Operation::Add) == 1);
    CHECK(ops.count(Operation::Mul) == 1);
  }

  TEST_CASE("validate rejects gold leaves beyond the quantities") {
    WordProblem p = testing::problem("Adam has 5 apples. How many apples does Adam have?");
    CHECK_NOTHROW(validate(p));
    p.gold = GoldAnnotation{parse_expression("[1]+[2]").expr, {}, {}};
    CHECK_THROWS_AS(validate(p), std::invalid_argument);
  }
}
