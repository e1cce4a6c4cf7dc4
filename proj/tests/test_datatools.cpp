#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "wps/datatools.hpp"
#include "wps/errors.hpp"

using namespace wps;
using testing::problem;
using testing::resources;

namespace {

Expression random_tree(std::mt19937_64& rng, std::vector<std::size_t> leaves) {
  if (leaves.size() == 1) return Expression::leaf(leaves[0]);
  std::size_t cut = 1 + rng() % (leaves.size() - 1);
  std::vector<std::size_t> l(leaves.begin(), leaves.begin() + cut), r(leaves.begin() + cut, leaves.end());
  static constexpr Operation ops[] = {Operation::Add, Operation::Sub, Operation::Mul, Operation::Div,
                                      Operation::DivReverse};
  return Expression::combine(ops[rng() % 5], random_tree(rng, l), random_tree(rng, r));
}

// Internal operations in post-order.
void ops_of(const Expression& e, std::vector<Operation>& out) {
  if (e.is_leaf()) return;
  ops_of(e.left(), out);
  ops_of(e.right(), out);
  out.push_back(e.op());
}

bool same_shape(const Expression& a, const Expression& b) {
  if (a.is_leaf() || b.is_leaf()) return a.is_leaf() && b.is_leaf() && a.quantity() == b.quantity();
  return same_shape(a.left(), b.left()) && same_shape(a.right(), b.right());
}

bool additive(Operation op) { return op == Operation::Add || op == Operation::Sub; }

int op_class(Operation op) { return op == Operation::DivReverse ? static_cast<int>(Operation::Div) : static_cast<int>(op); }

WordProblem with_gold(std::string text, const std::string& solution, const std::string& id = "p") {
  auto p = problem(std::move(text), id);
  p.gold = GoldAnnotation{parse_expression(solution).expr, {}, {}};
  return p;
}

}  // namespace

TEST_SUITE("datatools") {
  TEST_CASE("perturbation examples") {
    std::vector<Rational> v{Rational(10), Rational(2), Rational(4)};
    auto out = perturb_expression(parse_expression("([1]-[2])/[3]").expr, v);
    REQUIRE(out.size() == 2);
    CHECK(render(out[0], v) == "(10[1]+2[2])/4[3]");
    CHECK(evaluate(out[0], v) == Rational(3));
    CHECK(render(out[1], v) == "(10[1]-2[2])*4[3]");
    CHECK(evaluate(out[1], v) == Rational(32));

    std::vector<Rational> w{Rational(2), Rational(3)};
    CHECK(perturb_expression(parse_expression("[1]*[2]").expr, w).empty());  // 2/3 is not above 1
    std::vector<Rational> same{Rational(5), Rational(5)};
    CHECK(perturb_expression(parse_expression("[1]+[2]").expr, same).empty());  // 5-5
    CHECK(perturb_expression(Expression::leaf(0), same).empty());
  }

  TEST_CASE("perturbation properties on random expressions") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 1000; ++i) {
      std::size_t n = 2 + rng() % 4;
      std::vector<Rational> values;
      for (std::size_t k = 0; k < n; ++k) values.emplace_back(1 + rng() % 30);
      std::vector<std::size_t> leaves(n);
      std::iota(leaves.begin(), leaves.end(), 0);
      std::shuffle(leaves.begin(), leaves.end(), rng);
      Expression e = random_tree(rng, leaves);
      auto out = perturb_expression(e, values);

      std::vector<Operation> base;
      ops_of(e, base);
      std::size_t last_changed = 0;
      for (std::size_t a = 0; a < out.size(); ++a) {
        CHECK(same_shape(out[a], e));
        std::vector<Operation> ops;
        ops_of(out[a], ops);
        std::size_t changed = 0, where = 0;
        for (std::size_t k = 0; k < ops.size(); ++k) {
          if (op_class(ops[k]) != op_class(base[k])) ++changed, where = k;
          else CHECK(ops[k] == base[k]);  // division orientation is never altered
        }
        CHECK(changed == 1);
        CHECK(where >= last_changed);
        last_changed = where;
        CHECK(evaluate(out[a], values) > Rational(1));
        CHECK_FALSE(canonical_form(out[a]) == canonical_form(e));
        for (std::size_t b = 0; b < a; ++b) CHECK(canonical_form(out[a]) != canonical_form(out[b]));
      }
      // Completeness: every single swap that qualifies shows up.
      std::set<std::string> expected;
      for (std::size_t k = 0; k < base.size(); ++k) {
        std::size_t idx = 0;
        auto rebuild = [&](auto&& self, const Expression& x) -> Expression {
          if (x.is_leaf()) return x;
          Expression l = self(self, x.left());
          Expression r = self(self, x.right());
          Operation op = x.op();
          if (idx++ == k) op = additive(op) ? (op == Operation::Add ? Operation::Sub : Operation::Add)
                                            : (op == Operation::Mul ? Operation::Div : Operation::Mul);
          return Expression::combine(op, l, r);
        };
        Expression c = rebuild(rebuild, e);
        try {
          if (evaluate(c, values) > Rational(1) && canonical_form(c) != canonical_form(e))
            expected.insert(canonical_form(c));
        } catch (const DivisionByZero&) {
        }
      }
      std::set<std::string> got;
      for (const auto& x : out) got.insert(canonical_form(x));
      CHECK(got == expected);
    }
  }

  TEST_CASE("bias entropy: a word always next to one operation carries no uncertainty") {
    const std::string text = "Adam has 5 apples. Sam gave him 3 apples. How many apples does Adam have?";
    std::vector<WordProblem> one{with_gold(text, "[1]+[2]")};
    CHECK(bias_entropy(one, 3) == 0.0);
    std::vector<WordProblem> both{with_gold(text, "[1]+[2]", "a"), with_gold(text, "[1]-[2]", "b")};
    auto report = bias_report(both, 3);
    CHECK(report.mean == doctest::Approx(1.0));
    for (const auto& w : report.words) {
      CHECK(w.entropy == doctest::Approx(1.0));
      CHECK(w.ops.at(ParentOp::Add) == w.ops.at(ParentOp::Sub));
    }
    CHECK(bias_entropy(std::vector<WordProblem>{}, 3) == 0.0);
    CHECK(to_string(ParentOp::Div) == "div");
  }

  TEST_CASE("both division orientations count as one operation") {
    const std::string text = "Sam has 12 apples. He puts 3 apples in each bag. How many bags?";
    std::vector<WordProblem> c{with_gold(text, "[1]/[2]", "a"), with_gold(text, "[2]/[1]", "b")};
    CHECK(bias_entropy(c, 2) == 0.0);
  }

  TEST_CASE("bias entropy is order invariant and bounded") {
    auto corpus = testing::mini_train();
    double h = bias_entropy(corpus, 3);
    CHECK(h >= 0.0);
    CHECK(h <= 2.0);
    std::mt19937_64 rng(32);
    for (int i = 0; i < 5; ++i) {
      std::shuffle(corpus.begin(), corpus.end(), rng);
      CHECK(bias_entropy(corpus, 3) == h);
    }
    auto report = bias_report(corpus, 3);
    std::size_t occ = 0;
    double weighted = 0;
    for (const auto& w : report.words) {
      std::size_t sum = 0;
      double hw = 0;
      for (const auto& [op, c] : w.ops) sum += c;
      for (const auto& [op, c] : w.ops) {
        double p = double(c) / double(sum);
        hw -= p * std::log2(p);
      }
      CHECK(sum == w.occurrences);
      CHECK(w.entropy == doctest::Approx(hw));
      occ += sum;
      weighted += hw * double(sum);
    }
    CHECK(occ == report.occurrences);
    CHECK(report.mean == doctest::Approx(weighted / double(occ)));
    auto examples = make_examples(testing::mini_train(), resources());
    CHECK(bias_entropy(examples, 3) == doctest::Approx(h));
  }

  TEST_CASE("k-fold splits partition the corpus") {
    for (std::size_t n : {2u, 5u, 10u, 43u}) {
      for (int k : {2, 3, 5}) {
        if (static_cast<std::size_t>(k) > n) {
          CHECK_THROWS_AS(kfold_split(n, k, 1), InvalidK);
          continue;
        }
        auto folds = kfold_split(n, k, 1);
        REQUIRE(folds.size() == static_cast<std::size_t>(k));
        std::vector<int> seen(n, 0);
        std::size_t lo = n, hi = 0;
        for (const auto& f : folds) {
          CHECK(f.train.size() + f.test.size() == n);
          CHECK(std::is_sorted(f.train.begin(), f.train.end()));
          std::set<std::size_t> t(f.test.begin(), f.test.end());
          for (auto i : f.train) CHECK_FALSE(t.contains(i));
          for (auto i : f.test) ++seen[i];
          lo = std::min(lo, f.test.size());
          hi = std::max(hi, f.test.size());
        }
        CHECK(hi - lo <= 1);
        for (int s : seen) CHECK(s == 1);
        CHECK(kfold_split(n, k, 1)[0].test == folds[0].test);
      }
    }
    CHECK_THROWS_AS(kfold_split(10, 1, 1), InvalidK);
    CHECK_THROWS_AS(kfold_split(10, 0, 1), InvalidK);
  }

  TEST_CASE("evaluation is independent of the number of threads") {
    const auto& corpus = testing::mini_heldout();
    Model zero;
    auto a = evaluate(zero, corpus, resources(), 100, 1);
    auto b = evaluate(zero, corpus, resources(), 100, 4);
    CHECK(a.correct == b.correct);
    CHECK(a.total() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      CHECK(a.predicted[i].has_value() == b.predicted[i].has_value());
      if (a.predicted[i]) {
        CHECK(*a.predicted[i] == *b.predicted[i]);
        auto v = corpus[i].values();
        CHECK(a.correct[i] == (evaluate(*a.predicted[i], v) == evaluate(corpus[i].gold->solution, v)));
      } else {
        CHECK_FALSE(a.correct[i]);
      }
    }
    std::size_t tallied = 0;
    for (const auto& [c, t] : a.by_concept) {
      CHECK(t.correct <= t.total);
      tallied += t.total;
    }
    CHECK(tallied >= a.total());
  }

  TEST_CASE("evaluation skips problems without gold and handles an empty corpus") {
    std::vector<WordProblem> c{problem("Adam has 5 apples. Sam gave him 3 apples. How many apples does Adam have?")};
    auto r = evaluate(Model{}, c, resources(), 10);
    CHECK(r.skipped == 1);
    CHECK(r.total() == 0);
    CHECK_FALSE(r.accuracy());
  }

  TEST_CASE("paired bootstrap") {
    std::vector<bool> a(100, true), b(100, false);
    CHECK(significance(a, a) == 1.0);
    CHECK(significance(a, b) < 0.001);
    CHECK(significance({}, {}) == 1.0);
    CHECK_THROWS_AS(significance(a, std::vector<bool>(99, true)), LengthMismatch);

    // One disagreement in 1000: resamples hit it exactly once with
    // probability 1000 * 0.001 * 0.999^999, so p is about 1 - 0.368.
    std::vector<bool> x(1000, true), y(1000, true);
    y[17] = false;
    double p = significance(x, y, 10000, 5);
    CHECK(p > 0.05);
    CHECK(p == doctest::Approx(1.0 - std::pow(0.999, 999)).epsilon(0.03));
    CHECK(significance(x, y, 10000, 5) == p);
  }

  TEST_CASE("lexeme overlap") {
    const auto& train = testing::mini_train();
    auto self = lexeme_overlap(train, train);
    CHECK(self.mean_max_jaccard == doctest::Approx(1.0));
    CHECK(self.near_duplicates == train.size());
    std::vector<WordProblem> a{problem("Red cats sleep.")}, b{problem("Blue dogs run.")},
        c{problem("Red cats run.")};
    CHECK(lexeme_overlap(a, b).mean_max_jaccard == 0.0);
    CHECK(lexeme_overlap(a, c).mean_max_jaccard == doctest::Approx(0.5));
    CHECK(lexeme_overlap(a, c).near_duplicates == 0);
    CHECK(lexeme_overlap(a, std::vector<WordProblem>{}).mean_max_jaccard == 0.0);
  }
}
