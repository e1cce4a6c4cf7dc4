#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wps/knowledge.hpp"
#include "wps/problem.hpp"

namespace wps {

/// Exact fixed-point score with 32 fractional bits. Each weight-count product
/// is rounded once, so sums are associative and comparisons between search
/// strategies are exact. Arithmetic throws std::overflow_error.
class Score {
 public:
  static constexpr double kScale = 4294967296.0;

  constexpr Score() = default;
  static constexpr Score from_ticks(std::int64_t t) {
    Score s;
    s.ticks_ = t;
    return s;
  }
  /// round(weight * count * 2^32)
  static Score term(double weight, double count);
  static Score of(double value) { return term(value, 1.0); }

  std::int64_t ticks() const noexcept { return ticks_; }
  double to_double() const noexcept { return static_cast<double>(ticks_) / kScale; }

  Score& operator+=(Score o);
  friend Score operator+(Score a, Score b) { return a += b; }
  friend Score operator-(Score a, Score b);
  friend auto operator<=>(Score, Score) = default;

 private:
  std::int64_t ticks_ = 0;
};

using WeightVector = std::unordered_map<std::string, double>;

/// Sparse feature counts keyed by namespaced name ("r:..." or "k:...").
class FeatureVector {
 public:
  void add(const std::string& name, double count = 1.0);
  void merge(const FeatureVector& other, double scale = 1.0);

  const std::map<std::string, double>& entries() const noexcept { return counts_; }
  bool empty() const noexcept { return counts_.empty(); }
  std::size_t size() const noexcept { return counts_.size(); }
  double get(const std::string& name) const;

  Score dot(const WeightVector& w) const;
  double dot_double(const WeightVector& w) const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::map<std::string, double> counts_;
};

struct Hyperparams {
  double C = 1.0;
  int epochs = 30;
  std::size_t beam = 1000;
  std::size_t window = 3;
  std::uint64_t seed = 42;
};

struct Model {
  WeightVector w_r;  ///< keys start with "r:"
  WeightVector w_k;  ///< keys start with "k:"
  std::set<std::string> feature_dictionary;
  Hyperparams hyper;

  /// Weight of a feature in whichever namespace it belongs to; unseen features weigh 0.
  double weight(const std::string& name) const;
};

/// One combination in a derivation. `node` is the leaf mask of the new node.
struct DerivationStep {
  LeafMask node = 0;
  Concept kind = Concept::Transfer;
  std::string rule_id;
  std::size_t rep_left = 0;
  std::size_t rep_right = 0;
  Operation op = Operation::Add;
};

struct Derivation {
  Expression expression;
  std::vector<DerivationStep> steps;  ///< in combination order
};

/// Rule-level features for an applied rule between two quantities.
FeatureVector phi_r(const WordProblem& problem, const RuleApplication& app, const Quantity& left,
                    const Quantity& right);

/// Concept-level features for combining two quantities under `concept`.
FeatureVector phi_k(const WordProblem& problem, Concept kind, const Quantity& left, const Quantity& right,
                    const Resources& res);

/// Jaccard bucket label: "0", "lo" (0,0.5), "hi" [0.5,1), "1", or "none" when an argument is missing.
std::string jaccard_bucket(const SlotEvidence& ev);

/// Features and operation of one step, recomputed from the problem. Throws
/// UnknownRule for an unknown id and std::invalid_argument when the rule's
/// gates fail for the representatives.
struct StepFeatures {
  FeatureVector r;
  FeatureVector k;
  Operation op = Operation::Add;
};
StepFeatures step_features(const WordProblem& problem, const DerivationStep& step, const Resources& res);

Score score_step(const StepFeatures& f, const Model& model);
Score score_derivation(const WordProblem& problem, const Derivation& deriv, const Model& model, const Resources& res);

/// "# key=value" header lines followed by "feature<TAB>weight" sorted by name.
void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::filesystem::path& path);
/// Throws ParseError with a line number.
Model load_model(std::istream& in);
Model load_model(const std::filesystem::path& path);

}  // namespace wps
