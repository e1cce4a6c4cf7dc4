#include "wps/inference.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "wps/errors.hpp"

namespace wps {

namespace {

struct Item {
  Expression expr;
  std::size_t rep = 0;
  Rational value;
};

struct State {
  std::vector<Item> items;  // sorted by rep
  Score score;
  std::vector<DerivationStep> steps;
  std::vector<StepKey> keys;
};

bool better(const State& a, const State& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.keys < b.keys;
}

std::optional<Rational> apply(Operation op, const Rational& a, const Rational& b) {
  try {
    switch (op) {
      case Operation::Add: return a + b;
      case Operation::Sub: return a < b ? b - a : a - b;
      case Operation::Mul: return a * b;
      case Operation::Div:
        if (b.is_zero()) return std::nullopt;
        return a / b;
      case Operation::DivReverse:
        if (a.is_zero()) return std::nullopt;
        return b / a;
    }
  } catch (const std::overflow_error&) {
  }
  return std::nullopt;
}

State initial_state(const WordProblem& p, const std::vector<std::size_t>& quantities) {
  State s;
  for (std::size_t q : quantities) s.items.push_back({Expression::leaf(q), q, p.quantities.at(q).value});
  std::sort(s.items.begin(), s.items.end(), [](const Item& a, const Item& b) { return a.rep < b.rep; });
  return s;
}

// Calls f(child) for every successor of s.
template <class F>
void for_each_successor(const State& s, const ScoredTable& scored, const SolveOptions& opt, F&& f) {
  const CandidateTable& table = scored.table();
  const WordProblem& p = table.problem();
  const Score one = Score::of(1.0);
  for (std::size_t a = 0; a < s.items.size(); ++a) {
    for (std::size_t b = a + 1; b < s.items.size(); ++b) {
      const Item& l = s.items[a];
      const Item& r = s.items[b];
      const auto& cands = table.at(l.rep, r.rep);
      const auto& scores = scored.at(l.rep, r.rep);
      for (std::size_t c = 0; c < cands.size(); ++c) {
        const StepCandidate& cand = cands[c];
        auto value = apply(cand.op, l.value, r.value);
        if (!value) continue;
        Score step = scores[c];
        if (opt.gold_nodes && !opt.gold_nodes->contains(node_key(cand.op, l.expr.leaves(), r.expr.leaves())))
          step += one;

        State child;
        child.score = s.score + step;
        child.items.reserve(s.items.size() - 1);
        Item merged{Expression::combine(cand.op, l.expr, r.expr),
                    combine_representative(cand.kind, l.rep, r.rep, p), *value};
        for (std::size_t i = 0; i < s.items.size(); ++i)
          if (i != a && i != b) child.items.push_back(s.items[i]);
        child.items.insert(std::upper_bound(child.items.begin(), child.items.end(), merged.rep,
                                            [](std::size_t rep, const Item& it) { return rep < it.rep; }),
                           merged);
        child.steps = s.steps;
        child.steps.push_back({merged.expr.leaves(), cand.kind, table.resources().catalog.rules()[cand.rule_index].id,
                               l.rep, r.rep, cand.op});
        child.keys = s.keys;
        child.keys.emplace_back(l.rep, r.rep, l.expr.leaves(), r.expr.leaves(), static_cast<int>(cand.kind),
                                cand.rule_index);
        f(std::move(child));
      }
    }
  }
}

std::string state_key(const State& s) {
  std::string key;
  for (const auto& it : s.items) {
    key += render_indices(it.expr);
    key += '@';
    key += std::to_string(it.rep);
    key += ';';
  }
  return key;
}

SolveResult to_result(State s) {
  SolveResult out;
  out.derivation.expression = s.items.front().expr;
  out.derivation.steps = std::move(s.steps);
  out.score = s.score;
  out.keys = std::move(s.keys);
  return out;
}

std::vector<std::size_t> resolve_quantities(const ScoredTable& scored, const SolveOptions& opt) {
  if (opt.quantities) return *opt.quantities;
  return relevant_quantities(scored.table().problem(), scored.table().resources());
}

}  // namespace

std::size_t combine_representative(Concept kind, std::size_t left, std::size_t right, const WordProblem& p) {
  const auto& ls = p.quantities.at(left).schema;
  const auto& rs = p.quantities.at(right).schema;
  switch (kind) {
    case Concept::Transfer:
    case Concept::PartWhole: return left;
    case Concept::DimensionalAnalysis:
      if (!ls.rate) return left;
      return rs.rate ? left : right;
    case Concept::ExplicitMath:
      if (!ls.math_term) return left;
      return rs.math_term ? left : right;
  }
  return left;
}

std::size_t representative(const Expression& expr, const ConceptMap& concepts, const WordProblem& p) {
  if (expr.is_leaf()) return expr.quantity();
  std::size_t a = representative(expr.left(), concepts, p);
  std::size_t b = representative(expr.right(), concepts, p);
  Concept c = concepts.at(expr.leaves());
  return a < b ? combine_representative(c, a, b, p) : combine_representative(c, b, a, p);
}

NodeKey node_key(Operation op, LeafMask left, LeafMask right) {
  switch (op) {
    case Operation::Div: return {Operation::Div, left | right, left};
    case Operation::DivReverse: return {Operation::Div, left | right, right};
    default: return {op, left | right, 0};
  }
}

std::set<NodeKey> node_keys(const Expression& expr) {
  std::set<NodeKey> out;
  auto rec = [&](auto&& self, const Expression& e) -> void {
    if (e.is_leaf()) return;
    out.insert(node_key(e.op(), e.left().leaves(), e.right().leaves()));
    self(self, e.left());
    self(self, e.right());
  };
  rec(rec, expr);
  return out;
}

// ---------------------------------------------------------------------------

CandidateTable::CandidateTable(const WordProblem& problem, const Resources& res)
    : problem_(&problem), res_(&res), n_(problem.quantities.size()), cells_(n_ * n_) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const Quantity& l = problem.quantities[i];
      const Quantity& r = problem.quantities[j];
      auto& cell = cells_[i * n_ + j];
      for (Concept c : kAllConcepts) {
        FeatureVector k = phi_k(problem, c, l, r, res);
        for (const auto& app : applicable_rules(c, l, r, problem, res))
          cell.push_back({c, app.rule_index, app.op, phi_r(problem, app, l, r), k});
      }
    }
  }
}

const std::vector<StepCandidate>& CandidateTable::at(std::size_t left, std::size_t right) const {
  if (left >= right || right >= n_) throw std::out_of_range("candidate pair must satisfy left < right < n");
  return cells_[left * n_ + right];
}

ScoredTable::ScoredTable(const CandidateTable& table, const Model& model)
    : table_(&table), n_(table.problem().quantities.size()), cells_(n_ * n_) {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      for (const auto& c : table.at(i, j)) cells_[i * n_ + j].push_back(c.r.dot(model.w_r) + c.k.dot(model.w_k));
}

const std::vector<Score>& ScoredTable::at(std::size_t left, std::size_t right) const {
  if (left >= right || right >= n_) throw std::out_of_range("candidate pair must satisfy left < right < n");
  return cells_[left * n_ + right];
}

std::vector<std::size_t> relevant_quantities(const WordProblem& problem, const Resources& res) {
  auto excluded = filter_irrelevant(problem, res.rules);
  std::vector<std::size_t> out;
  for (const auto& q : problem.quantities)
    if (!excluded.contains(q.index)) out.push_back(q.index);
  return out;
}

SolveResult solve(const ScoredTable& scored, const SolveOptions& opt) {
  if (opt.beam == 0) throw std::invalid_argument("beam width must be at least 1");
  const WordProblem& p = scored.table().problem();
  auto quantities = resolve_quantities(scored, opt);
  if (quantities.empty()) throw NoDerivation(p.id);

  std::vector<State> beam{initial_state(p, quantities)};
  for (std::size_t round = 1; round < quantities.size(); ++round) {
    std::unordered_map<std::string, State> merged;
    for (const State& s : beam) {
      for_each_successor(s, scored, opt, [&](State child) {
        auto key = state_key(child);
        auto it = merged.find(key);
        if (it == merged.end()) {
          merged.emplace(std::move(key), std::move(child));
        } else if (better(child, it->second)) {
          it->second = std::move(child);
        }
      });
    }
    if (merged.empty()) throw NoDerivation(p.id);
    beam.clear();
    beam.reserve(merged.size());
    for (auto& [k, s] : merged) beam.push_back(std::move(s));
    std::sort(beam.begin(), beam.end(), better);
    if (beam.size() > opt.beam) beam.resize(opt.beam);
  }
  return to_result(std::move(beam.front()));
}

SolveResult solve(const WordProblem& problem, const Model& model, const Resources& res, std::size_t beam) {
  CandidateTable table(problem, res);
  ScoredTable scored(table, model);
  SolveOptions opt;
  opt.beam = beam;
  return solve(scored, opt);
}

SolveResult exhaustive_solve(const ScoredTable& scored, const SolveOptions& opt) {
  const WordProblem& p = scored.table().problem();
  auto quantities = resolve_quantities(scored, opt);
  if (quantities.empty()) throw NoDerivation(p.id);
  std::optional<State> best;
  auto dfs = [&](auto&& self, const State& s) -> void {
    if (s.items.size() == 1) {
      if (!best || better(s, *best)) best = s;
      return;
    }
    for_each_successor(s, scored, opt, [&](State child) { self(self, child); });
  };
  dfs(dfs, initial_state(p, quantities));
  if (!best) throw NoDerivation(p.id);
  return to_result(std::move(*best));
}

SolveResult exhaustive_solve(const WordProblem& problem, const Model& model, const Resources& res) {
  CandidateTable table(problem, res);
  ScoredTable scored(table, model);
  return exhaustive_solve(scored, SolveOptions{});
}

std::size_t count_derivations(const CandidateTable& table, const std::vector<std::size_t>& quantities) {
  Model zero;
  ScoredTable scored(table, zero);
  SolveOptions opt;
  opt.quantities = quantities;
  std::size_t count = 0;
  auto dfs = [&](auto&& self, const State& s) -> void {
    if (s.items.size() == 1) {
      ++count;
      return;
    }
    for_each_successor(s, scored, opt, [&](State child) { self(self, child); });
  };
  if (!quantities.empty()) dfs(dfs, initial_state(table.problem(), quantities));
  return count;
}

}  // namespace wps
