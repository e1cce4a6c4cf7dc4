#pragma once

#include <compare>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "wps/knowledge.hpp"
#include "wps/problem.hpp"
#include "wps/scoring.hpp"

namespace wps {

/// Leaf chosen to stand for a node built under `concept` from children
/// represented by `left` and `right` (left precedes right in the text).
std::size_t combine_representative(Concept kind, std::size_t left, std::size_t right, const WordProblem& problem);

/// Representative of a whole tree; internal nodes take their concept from
/// `concepts` (keyed by leaf mask). Throws std::out_of_range for unlabeled nodes.
std::size_t representative(const Expression& expr, const ConceptMap& concepts, const WordProblem& problem);

/// Identity of a node for loss purposes: operation kind with Div and
/// DivReverse merged, the operand leaves, and the dividend's leaves.
struct NodeKey {
  Operation kind = Operation::Add;
  LeafMask mask = 0;
  LeafMask numerator = 0;
  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
};
NodeKey node_key(Operation op, LeafMask left, LeafMask right);
std::set<NodeKey> node_keys(const Expression& expr);

/// One applicable (concept, rule) for an ordered pair of representatives.
struct StepCandidate {
  Concept kind = Concept::Transfer;
  std::size_t rule_index = 0;
  Operation op = Operation::Add;
  FeatureVector r;
  FeatureVector k;
};

/// Step features depend only on the two representatives, so they are
/// computed once per problem for every ordered pair i < j.
class CandidateTable {
 public:
  CandidateTable(const WordProblem& problem, const Resources& res);

  const WordProblem& problem() const noexcept { return *problem_; }
  const Resources& resources() const noexcept { return *res_; }
  /// Candidates with `left` < `right` as Verb1/Verb2 order.
  const std::vector<StepCandidate>& at(std::size_t left, std::size_t right) const;

 private:
  const WordProblem* problem_;
  const Resources* res_;
  std::size_t n_;
  std::vector<std::vector<StepCandidate>> cells_;
};

/// Candidate scores under one model, parallel to CandidateTable::at.
class ScoredTable {
 public:
  ScoredTable(const CandidateTable& table, const Model& model);
  const CandidateTable& table() const noexcept { return *table_; }
  const std::vector<Score>& at(std::size_t left, std::size_t right) const;

 private:
  const CandidateTable* table_;
  std::size_t n_;
  std::vector<std::vector<Score>> cells_;
};

/// Ordering key of one step; sequences of these break score ties.
using StepKey = std::tuple<std::size_t, std::size_t, LeafMask, LeafMask, int, std::size_t>;

struct SolveResult {
  Derivation derivation;
  Score score;
  std::vector<StepKey> keys;
  const Expression& expression() const noexcept { return derivation.expression; }
};

struct SolveOptions {
  std::size_t beam = 1000;
  /// Loss-augmented decoding: each step whose node is absent from this set adds 1.
  std::optional<std::set<NodeKey>> gold_nodes;
  /// Quantities to search over; defaults to the complement of filter_irrelevant.
  std::optional<std::vector<std::size_t>> quantities;
};

/// Quantities that survive irrelevant-number filtering, in text order.
std::vector<std::size_t> relevant_quantities(const WordProblem& problem, const Resources& res);

/// Beam search. Throws NoDerivation when no chain of rules combines the
/// quantities, or when there are none.
SolveResult solve(const ScoredTable& scored, const SolveOptions& options);
SolveResult solve(const WordProblem& problem, const Model& model, const Resources& res, std::size_t beam);

/// Exact argmax over every derivation by depth-first enumeration, with the
/// same tie-breaking as solve. Meant for at most five quantities.
SolveResult exhaustive_solve(const ScoredTable& scored, const SolveOptions& options);
SolveResult exhaustive_solve(const WordProblem& problem, const Model& model, const Resources& res);

/// Number of complete derivations (pair x concept x rule choices, division
/// by zero excluded), for enumeration checks.
std::size_t count_derivations(const CandidateTable& table, const std::vector<std::size_t>& quantities);

}  // namespace wps
