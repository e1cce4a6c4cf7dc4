#include "wps/datatools.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "wps/errors.hpp"
#include "wps/shuffle.hpp"

namespace wps {

namespace {

std::optional<Operation> swapped(Operation op) {
  switch (op) {
    case Operation::Add: return Operation::Sub;
    case Operation::Sub: return Operation::Add;
    case Operation::Mul: return Operation::Div;
    case Operation::Div:
    case Operation::DivReverse: return Operation::Mul;
  }
  return std::nullopt;
}

// Every tree with exactly one node's operation swapped, in post-order of that node.
std::vector<Expression> single_swaps(const Expression& e) {
  std::vector<Expression> out;
  if (e.is_leaf()) return out;
  for (auto& l : single_swaps(e.left())) out.push_back(Expression::combine(e.op(), l, e.right()));
  for (auto& r : single_swaps(e.right())) out.push_back(Expression::combine(e.op(), e.left(), r));
  out.push_back(Expression::combine(*swapped(e.op()), e.left(), e.right()));
  return out;
}

ParentOp parent_op(Operation op) {
  switch (op) {
    case Operation::Add: return ParentOp::Add;
    case Operation::Sub: return ParentOp::Sub;
    case Operation::Mul: return ParentOp::Mul;
    case Operation::Div:
    case Operation::DivReverse: return ParentOp::Div;
  }
  return ParentOp::Add;
}

void parent_ops(const Expression& e, std::map<std::size_t, ParentOp>& out) {
  if (e.is_leaf()) return;
  for (const Expression* child : {&e.left(), &e.right()}) {
    if (child->is_leaf()) out[child->quantity()] = parent_op(e.op());
    else parent_ops(*child, out);
  }
}

double entropy_bits(const std::map<ParentOp, std::size_t>& counts, std::size_t total) {
  double h = 0;
  for (const auto& [op, c] : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

std::set<std::string> word_set(const WordProblem& p) {
  std::set<std::string> out;
  for (const auto& t : p.tokens)
    if (is_word(t.lower)) out.insert(t.lower);
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& w : a) inter += b.contains(w) ? 1 : 0;
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

std::vector<Expression> perturb_expression(const Expression& expr, std::span<const Rational> values) {
  std::vector<Expression> out;
  std::set<std::string> seen{canonical_form(expr)};
  const Rational one(1);
  for (auto& candidate : single_swaps(expr)) {
    try {
      if (!(evaluate(candidate, values) > one)) continue;
    } catch (const DivisionByZero&) {
      continue;
    } catch (const std::overflow_error&) {
      continue;
    }
    if (seen.insert(canonical_form(candidate)).second) out.push_back(std::move(candidate));
  }
  return out;
}

std::vector<Expression> perturb_expression(const Expression& expr, const WordProblem& problem) {
  const auto values = problem.values();
  return perturb_expression(expr, values);
}

std::string_view to_string(ParentOp op) {
  switch (op) {
    case ParentOp::Add: return "add";
    case ParentOp::Sub: return "sub";
    case ParentOp::Mul: return "mul";
    case ParentOp::Div: return "div";
  }
  return "?";
}

EntropyReport bias_report(std::span<const WordProblem> corpus, std::size_t window) {
  std::map<std::string, WordEntropy> words;
  std::size_t occurrences = 0;
  for (const auto& p : corpus) {
    if (!p.gold) continue;
    std::map<std::size_t, ParentOp> ops;
    parent_ops(p.gold->solution, ops);
    for (const auto& [q, op] : ops) {
      for (const auto& w : neighborhood_words(p, p.quantities.at(q), window)) {
        auto& entry = words[w];
        entry.word = w;
        ++entry.occurrences;
        ++entry.ops[op];
        ++occurrences;
      }
    }
  }
  EntropyReport report;
  report.occurrences = occurrences;
  double weighted = 0;
  for (auto& [w, entry] : words) {
    entry.entropy = entropy_bits(entry.ops, entry.occurrences);
    weighted += entry.entropy * static_cast<double>(entry.occurrences);
    report.words.push_back(std::move(entry));
  }
  if (occurrences > 0) report.mean = weighted / static_cast<double>(occurrences);
  std::stable_sort(report.words.begin(), report.words.end(), [](const WordEntropy& a, const WordEntropy& b) {
    return a.entropy * static_cast<double>(a.occurrences) > b.entropy * static_cast<double>(b.occurrences);
  });
  return report;
}

double bias_entropy(std::span<const WordProblem> corpus, std::size_t window) {
  return bias_report(corpus, window).mean;
}

double bias_entropy(const std::vector<TrainingExample>& corpus, std::size_t window) {
  // Examples carry their own gold, which may differ from the problem's.
  std::vector<WordProblem> copies;
  copies.reserve(corpus.size());
  for (const auto& ex : corpus) {
    WordProblem p = *ex.problem;
    p.gold = GoldAnnotation{ex.gold, {}, ex.concepts};
    copies.push_back(std::move(p));
  }
  return bias_entropy(copies, window);
}

std::vector<Fold> kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidK("k must be at least 2, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > n)
    throw InvalidK("k = " + std::to_string(k) + " exceeds corpus size " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  stable_shuffle(order, rng);

  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<Fold> folds(kk);
  std::size_t begin = 0;
  for (std::size_t f = 0; f < kk; ++f) {
    std::size_t size = n / kk + (f < n % kk ? 1 : 0);
    std::vector<bool> in_test(n, false);
    for (std::size_t i = begin; i < begin + size; ++i) in_test[order[i]] = true;
    for (std::size_t i = 0; i < n; ++i) (in_test[i] ? folds[f].test : folds[f].train).push_back(i);
    begin += size;
  }
  return folds;
}

std::size_t EvalReport::hits() const {
  return static_cast<std::size_t>(std::count(correct.begin(), correct.end(), true));
}

std::optional<double> EvalReport::accuracy() const {
  if (correct.empty()) return std::nullopt;
  return static_cast<double>(hits()) / static_cast<double>(correct.size());
}

EvalReport evaluate(const Model& model, std::span<const WordProblem> corpus, const Resources& res, std::size_t beam,
                    std::size_t jobs) {
  std::vector<const WordProblem*> gold;
  EvalReport report;
  for (const auto& p : corpus) {
    if (p.gold) gold.push_back(&p);
    else ++report.skipped;
  }
  report.correct.assign(gold.size(), false);
  report.predicted.assign(gold.size(), std::nullopt);

  // vector<bool> packs bits, so threads write to a byte array instead.
  std::vector<char> flags(gold.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < gold.size(); i = next++) {
      const WordProblem& p = *gold[i];
      try {
        Expression y = solve(p, model, res, beam).expression();
        const auto values = p.values();
        flags[i] = evaluate(y, values) == evaluate(p.gold->solution, values);
        report.predicted[i] = std::move(y);
      } catch (const NoDerivation&) {
      } catch (const DivisionByZero&) {
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, gold.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < gold.size(); ++i) report.correct[i] = flags[i] != 0;

  for (std::size_t i = 0; i < gold.size(); ++i) {
    const WordProblem& p = *gold[i];
    ConceptMap concepts = p.gold->concept_labels;
    try {
      concepts = annotate_concepts(p, p.gold->solution, p.gold->rate_indices, res, p.gold->concept_labels);
    } catch (const AnnotationGap&) {
    }
    std::set<Concept> present;
    for (const auto& [mask, c] : concepts) present.insert(c);
    for (Concept c : present) {
      auto& tally = report.by_concept[c];
      ++tally.total;
      if (report.correct[i]) ++tally.correct;
    }
  }
  return report;
}

double significance(const std::vector<bool>& a, const std::vector<bool>& b, std::size_t resamples,
                    std::uint64_t seed) {
  if (a.size() != b.size())
    throw LengthMismatch("paired vectors differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  const std::size_t n = a.size();
  if (n == 0 || resamples == 0) return 1.0;
  // Differences are in {-1, 0, 1}; integer sums keep the comparison exact.
  std::vector<int> d(n);
  long long observed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = int(a[i]) - int(b[i]);
    observed += d[i];
  }
  std::mt19937_64 rng(seed);
  std::size_t extreme = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    long long sum = 0;
    for (std::size_t i = 0; i < n; ++i) sum += d[rng() % n];
    if (std::llabs(sum - observed) >= std::llabs(observed)) ++extreme;
  }
  return static_cast<double>(extreme + 1) / static_cast<double>(resamples + 1);
}

OverlapReport lexeme_overlap(std::span<const WordProblem> train, std::span<const WordProblem> test, double threshold) {
  OverlapReport out;
  out.threshold = threshold;
  if (test.empty()) return out;
  std::vector<std::set<std::string>> train_sets;
  for (const auto& p : train) train_sets.push_back(word_set(p));
  double total = 0;
  for (const auto& p : test) {
    auto s = word_set(p);
    double best = 0;
    for (const auto& t : train_sets) best = std::max(best, jaccard(s, t));
    total += best;
    if (best >= threshold) ++out.near_duplicates;
  }
  out.mean_max_jaccard = total / static_cast<double>(test.size());
  return out;
}

}  // namespace wps
