#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "wps/inference.hpp"
#include "wps/knowledge.hpp"
#include "wps/problem.hpp"
#include "wps/scoring.hpp"

namespace wps {

struct TrainingExample {
  const WordProblem* problem = nullptr;  ///< must outlive the example
  Expression gold;
  ConceptMap concepts;  ///< covers every internal node of `gold`
};

/// Noisy concept labels for every internal node, bottom-up over
/// representatives: a math term on either side gives ExplicitMath; x or /
/// with an annotated rate gives DimensionalAnalysis; + or - gives PartWhole
/// when both dependent verbs share a lemma and Transfer otherwise. Nodes in
/// `given` keep their label. Throws AnnotationGap for x or / with neither
/// rate nor math term.
ConceptMap annotate_concepts(const WordProblem& problem, const Expression& gold, const std::set<std::size_t>& rates,
                             const Resources& res, const ConceptMap& given = {});

struct EpochRecord {
  int stage = 1;
  int epoch = 0;
  double objective = 0;
  bool accepted = true;
  double accuracy = 0;  ///< stage 1: node-level op accuracy; stage 2: problem accuracy
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::vector<std::string> warnings;
  std::size_t examples = 0;
  std::size_t stage1_nodes = 0;
};

/// Builds examples from gold-annotated problems, annotating missing concept
/// labels. Problems without gold or with annotation gaps are skipped with a warning.
std::vector<TrainingExample> make_examples(const std::vector<WordProblem>& problems, const Resources& res,
                                           TrainingLog* log = nullptr);

/// Gold nodes (rendered) that no rule of their concept explains.
std::vector<std::string> unreachable_nodes(const TrainingExample& ex, const Resources& res);

/// Derivation of the gold expression with concepts fixed and, per node, the
/// highest-scoring rule among those producing the gold operation (ties go to
/// the earlier rule). Throws ReachabilityError.
Derivation gold_derivation(const WordProblem& problem, const Expression& gold, const ConceptMap& concepts,
                           const Model& model, const Resources& res);
Score gold_score(const WordProblem& problem, const Expression& gold, const ConceptMap& concepts, const Model& model,
                 const Resources& res);

struct TrainOptions {
  /// Throw ReachabilityError instead of skipping unexplainable nodes.
  bool strict = false;
};

/// Stage 1: latent max-margin over rules within each gold concept.
WeightVector train_rule_weights(const std::vector<TrainingExample>& data, const Resources& res,
                                const Hyperparams& hyper, TrainingLog* log = nullptr, TrainOptions opt = {});

/// Exact stage-1 objective: 1/2 |w|^2 + C * sum over explainable nodes of the
/// latent hinge.
double rule_objective(const std::vector<TrainingExample>& data, const WeightVector& w_r, const Resources& res,
                      const Hyperparams& hyper);

/// Stage 2: structured max-margin over whole derivations with w_r fixed,
/// using loss-augmented beam search.
WeightVector train_concept_weights(const std::vector<TrainingExample>& data, const WeightVector& w_r,
                                   const Resources& res, const Hyperparams& hyper, TrainingLog* log = nullptr);

/// Both stages plus the feature dictionary of every training problem.
Model train(const std::vector<WordProblem>& problems, const Resources& res, const Hyperparams& hyper,
            TrainingLog* log = nullptr, TrainOptions opt = {});

/// Fraction of examples whose solve() value equals the gold value.
double training_accuracy(const std::vector<TrainingExample>& data, const Model& model, const Resources& res);

}  // namespace wps
