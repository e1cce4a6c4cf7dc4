#include "wps/scoring.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "wps/errors.hpp"

namespace wps {

namespace {

std::string slot_name(const CorefSlot& s) {
  return std::string(to_string(s.left)) + "1~" + std::string(to_string(s.right)) + "2";
}

std::string_view concept_prefix(Concept c) {
  switch (c) {
    case Concept::Transfer: return "k:tr:";
    case Concept::DimensionalAnalysis: return "k:dim:";
    case Concept::PartWhole: return "k:pw:";
    case Concept::ExplicitMath: return "k:em:";
  }
  return "k:?:";
}

}  // namespace

Score Score::term(double weight, double count) {
  double v = std::nearbyint(weight * count * kScale);
  if (!std::isfinite(v) || std::fabs(v) >= 9.0e18) throw std::overflow_error("score term out of range");
  return from_ticks(static_cast<std::int64_t>(v));
}

Score& Score::operator+=(Score o) {
  if (__builtin_add_overflow(ticks_, o.ticks_, &ticks_)) throw std::overflow_error("score overflow");
  return *this;
}

Score operator-(Score a, Score b) {
  std::int64_t t;
  if (__builtin_sub_overflow(a.ticks_, b.ticks_, &t)) throw std::overflow_error("score overflow");
  return Score::from_ticks(t);
}

void FeatureVector::add(const std::string& name, double count) { counts_[name] += count; }

void FeatureVector::merge(const FeatureVector& other, double scale) {
  for (const auto& [k, v] : other.counts_) counts_[k] += scale * v;
}

double FeatureVector::get(const std::string& name) const {
  auto it = counts_.find(name);
  return it == counts_.end() ? 0.0 : it->second;
}

Score FeatureVector::dot(const WeightVector& w) const {
  Score s;
  for (const auto& [k, c] : counts_)
    if (auto it = w.find(k); it != w.end()) s += Score::term(it->second, c);
  return s;
}

double FeatureVector::dot_double(const WeightVector& w) const {
  double s = 0;
  for (const auto& [k, c] : counts_)
    if (auto it = w.find(k); it != w.end()) s += it->second * c;
  return s;
}

double Model::weight(const std::string& name) const {
  const WeightVector& w = name.starts_with("k:") ? w_k : w_r;
  auto it = w.find(name);
  return it == w.end() ? 0.0 : it->second;
}

std::string jaccard_bucket(const SlotEvidence& ev) {
  if (!ev.left || !ev.right) return "none";
  std::set<std::string> a(ev.left->begin(), ev.left->end());
  std::set<std::string> b(ev.right->begin(), ev.right->end());
  if (a.empty() || b.empty()) return "none";
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  std::size_t uni = a.size() + b.size() - inter;
  if (inter == 0) return "0";
  if (inter == uni) return "1";
  return 2 * inter < uni ? "lo" : "hi";
}

FeatureVector phi_r(const WordProblem&, const RuleApplication& app, const Quantity& left, const Quantity& right) {
  FeatureVector f;
  const std::string rule = "r:" + app.rule->id + ":";
  for (const auto& ev : app.evidence) {
    const std::string slot = slot_name(ev.slot);
    const std::string jac = "jaccard=" + jaccard_bucket(ev);
    const std::string pron = ev.pronoun ? "pronoun=1" : "pronoun=0";
    f.add(rule + slot + ":" + jac);
    f.add(rule + slot + ":" + pron);
    // Rule-agnostic copies let coreference evidence transfer across verb classes.
    f.add("r:coref:" + slot + ":" + jac);
    f.add("r:coref:" + slot + ":" + pron);
  }
  if (app.part_whole) {
    const std::string rel(to_string(app.part_whole->relation));
    for (const auto& cue : app.part_whole->cues) f.add(rule + rel + ":cue=" + cue);
  }
  for (const auto& w : left.schema.neighborhood) f.add(rule + "w1=" + w);
  for (const auto& w : right.schema.neighborhood) f.add(rule + "w2=" + w);
  return f;
}

FeatureVector phi_k(const WordProblem& problem, Concept kind, const Quantity& left, const Quantity& right,
                    const Resources& res) {
  FeatureVector f;
  const std::string prefix(concept_prefix(kind));
  f.add(prefix + "bias");
  if (kind == Concept::DimensionalAnalysis) {
    if (left.schema.rate) f.add(prefix + "rate_on_left");
    if (right.schema.rate) f.add(prefix + "rate_on_right");
  } else if (kind == Concept::PartWhole) {
    if (left.schema.verb && right.schema.verb &&
        res.rules.lemma(problem.tokens.at(*left.schema.verb).lower) ==
            res.rules.lemma(problem.tokens.at(*right.schema.verb).lower))
      f.add(prefix + "same_verb");
  }
  return f;
}

StepFeatures step_features(const WordProblem& problem, const DerivationStep& step, const Resources& res) {
  const Rule& rule = res.catalog.find(step.rule_id);
  if (rule.kind != step.kind) throw std::invalid_argument("rule " + rule.id + " does not belong to the step's concept");
  const Quantity& l = problem.quantities.at(step.rep_left);
  const Quantity& r = problem.quantities.at(step.rep_right);
  for (const auto& app : applicable_rules(step.kind, l, r, problem, res)) {
    if (app.rule->id != step.rule_id) continue;
    return {phi_r(problem, app, l, r), phi_k(problem, step.kind, l, r, res), app.op};
  }
  throw std::invalid_argument("rule " + step.rule_id + " is not applicable to quantities " +
                              std::to_string(step.rep_left + 1) + " and " + std::to_string(step.rep_right + 1));
}

Score score_step(const StepFeatures& f, const Model& model) { return f.r.dot(model.w_r) + f.k.dot(model.w_k); }

Score score_derivation(const WordProblem& problem, const Derivation& deriv, const Model& model, const Resources& res) {
  Score total;
  for (const auto& step : deriv.steps) total += score_step(step_features(problem, step, res), model);
  return total;
}

}  // namespace wps
