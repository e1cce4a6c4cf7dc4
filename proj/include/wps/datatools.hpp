#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wps/learning.hpp"

namespace wps {

/// Single-operation variants of `expr`: each internal node in turn swaps
/// + with - or x with /, keeping variants that evaluate above 1. Results are
/// pairwise non-equivalent, never equivalent to `expr`, and listed in
/// post-order of the changed node.
std::vector<Expression> perturb_expression(const Expression& expr, std::span<const Rational> values);
std::vector<Expression> perturb_expression(const Expression& expr, const WordProblem& problem);

/// Operation attributed to a quantity: the one at its parent in the gold tree.
/// Both division orientations count as one operation.
enum class ParentOp : std::uint8_t { Add, Sub, Mul, Div };
std::string_view to_string(ParentOp op);

struct WordEntropy {
  std::string word;
  std::size_t occurrences = 0;
  std::map<ParentOp, std::size_t> ops;
  double entropy = 0;  ///< bits
};

struct EntropyReport {
  double mean = 0;  ///< over (quantity, neighborhood word) occurrences; 0 when there are none
  std::size_t occurrences = 0;
  std::vector<WordEntropy> words;  ///< by descending total contribution, then word
};

/// Bias of a corpus toward predicting an operation from nearby words. Only
/// leaves of gold solutions contribute; problems without gold are ignored.
EntropyReport bias_report(std::span<const WordProblem> corpus, std::size_t window);
double bias_entropy(std::span<const WordProblem> corpus, std::size_t window);
double bias_entropy(const std::vector<TrainingExample>& corpus, std::size_t window);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of [0, n) cut into k test blocks whose sizes differ by at
/// most one. Throws InvalidK unless 2 <= k <= n.
std::vector<Fold> kfold_split(std::size_t n, int k, std::uint64_t seed);

struct ConceptTally {
  std::size_t total = 0;
  std::size_t correct = 0;
};

struct EvalReport {
  std::vector<bool> correct;                    ///< per problem, corpus order
  std::vector<std::optional<Expression>> predicted;  ///< nullopt on NoDerivation
  std::map<Concept, ConceptTally> by_concept;   ///< a problem counts once for each concept in its gold tree
  std::size_t skipped = 0;                      ///< problems without gold

  std::size_t total() const noexcept { return correct.size(); }
  std::size_t hits() const;
  /// nullopt for an empty corpus.
  std::optional<double> accuracy() const;
};

/// Solves every gold-annotated problem; correct means the exact values agree.
/// `jobs` > 1 solves problems on that many threads without changing the result.
EvalReport evaluate(const Model& model, std::span<const WordProblem> corpus, const Resources& res, std::size_t beam,
                    std::size_t jobs = 1);

/// Two-sided paired bootstrap p-value for a difference in mean accuracy.
/// Resampled differences are centered on the observed one; p = (hits + 1) / (resamples + 1).
/// Throws LengthMismatch.
double significance(const std::vector<bool>& a, const std::vector<bool>& b, std::size_t resamples = 10000,
                    std::uint64_t seed = 42);

/// Word-overlap diagnostic between a training and a test corpus.
struct OverlapReport {
  double mean_max_jaccard = 0;  ///< mean over test problems of the best match in train
  std::size_t near_duplicates = 0;  ///< test problems whose best match is >= threshold
  double threshold = 0.8;
};
OverlapReport lexeme_overlap(std::span<const WordProblem> train, std::span<const WordProblem> test,
                             double threshold = 0.8);

}  // namespace wps
