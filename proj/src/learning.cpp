#include "wps/learning.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "wps/errors.hpp"
#include "wps/shuffle.hpp"

namespace wps {

namespace {

Operation swap_direction(Operation op) {
  if (op == Operation::Div) return Operation::DivReverse;
  if (op == Operation::DivReverse) return Operation::Div;
  return op;
}

// A gold node in search orientation: the left operand's representative
// precedes the right one's in the text.
struct GoldNode {
  LeafMask mask = 0;
  Concept kind = Concept::Transfer;
  std::size_t rep_left = 0;
  std::size_t rep_right = 0;
  Operation op = Operation::Add;
  std::string label;
};

std::vector<GoldNode> gold_nodes(const WordProblem& p, const Expression& gold, const ConceptMap& concepts) {
  std::vector<GoldNode> out;
  const auto values = p.values();
  auto rec = [&](auto&& self, const Expression& e) -> std::size_t {
    if (e.is_leaf()) return e.quantity();
    std::size_t a = self(self, e.left());
    std::size_t b = self(self, e.right());
    GoldNode n;
    n.mask = e.leaves();
    n.kind = concepts.at(n.mask);
    n.op = e.op();
    if (a > b) {
      std::swap(a, b);
      n.op = swap_direction(n.op);
    }
    n.rep_left = a;
    n.rep_right = b;
    n.label = render(e, values) + " [" + std::string(to_string(n.kind)) + "]";
    out.push_back(n);
    return combine_representative(n.kind, a, b, p);
  };
  rec(rec, gold);
  return out;
}

void scale(WeightVector& w, double s) {
  for (auto& [k, v] : w) v *= s;
}

double squared_norm(const WeightVector& w) {
  double s = 0;
  for (const auto& [k, v] : w) s += v * v;
  return s;
}

void add_scaled(WeightVector& w, const FeatureVector& f, double s) {
  for (const auto& [k, c] : f.entries()) w[k] += s * c;
}

void project(WeightVector& w, double radius) {
  double n = std::sqrt(squared_norm(w));
  if (n > radius && n > 0) scale(w, radius / n);
}

// ---------------------------------------------------------------------------
// Stage 1 bookkeeping

struct NodeInstance {
  std::vector<const StepCandidate*> all;  // every rule of the gold concept
  std::vector<double> delta;              // 0-1 loss of each against the gold op
  std::vector<std::size_t> gold;          // indices into `all` producing the gold op
};

struct Stage1Data {
  std::vector<std::unique_ptr<CandidateTable>> tables;
  std::vector<NodeInstance> nodes;
  std::vector<std::string> unreachable;
};

Stage1Data prepare_stage1(const std::vector<TrainingExample>& data, const Resources& res) {
  Stage1Data d;
  for (const auto& ex : data) {
    d.tables.push_back(std::make_unique<CandidateTable>(*ex.problem, res));
    const CandidateTable& table = *d.tables.back();
    for (const GoldNode& g : gold_nodes(*ex.problem, ex.gold, ex.concepts)) {
      NodeInstance inst;
      for (const auto& c : table.at(g.rep_left, g.rep_right)) {
        if (c.kind != g.kind) continue;
        if (c.op == g.op) inst.gold.push_back(inst.all.size());
        inst.delta.push_back(c.op == g.op ? 0.0 : 1.0);
        inst.all.push_back(&c);
      }
      if (inst.gold.empty()) {
        d.unreachable.push_back(ex.problem->id + ": " + g.label);
        continue;
      }
      d.nodes.push_back(std::move(inst));
    }
  }
  return d;
}

struct LatentArgmax {
  std::size_t predicted = 0;  // loss-augmented argmax over all rules
  std::size_t gold = 0;       // argmax over gold-op rules
  double loss = 0;
};

LatentArgmax latent_argmax(const NodeInstance& n, const WeightVector& w) {
  LatentArgmax out;
  double best = -INFINITY;
  for (std::size_t i = 0; i < n.all.size(); ++i) {
    double s = n.all[i]->r.dot_double(w) + n.delta[i];
    if (s > best) {
      best = s;
      out.predicted = i;
    }
  }
  double best_gold = -INFINITY;
  for (std::size_t i : n.gold) {
    double s = n.all[i]->r.dot_double(w);
    if (s > best_gold) {
      best_gold = s;
      out.gold = i;
    }
  }
  out.loss = std::max(0.0, best - best_gold);
  return out;
}

double stage1_objective(const Stage1Data& d, const WeightVector& w, double C) {
  double hinge = 0;
  for (const auto& n : d.nodes) hinge += latent_argmax(n, w).loss;
  return 0.5 * squared_norm(w) + C * hinge;
}

// ---------------------------------------------------------------------------
// Stage 2 bookkeeping

struct Stage2Example {
  const TrainingExample* ex = nullptr;
  std::unique_ptr<CandidateTable> table;
  std::set<NodeKey> gold_keys;
  Score gold_rule_score;  // fixed w_r part of the gold score
  FeatureVector gold_k;   // summed concept features of the gold derivation
};

FeatureVector concept_features(const CandidateTable& table, const std::vector<DerivationStep>& steps) {
  FeatureVector f;
  for (const auto& s : steps) {
    for (const auto& c : table.at(s.rep_left, s.rep_right)) {
      if (c.kind == s.kind) {
        f.merge(c.k);
        break;
      }
    }
  }
  return f;
}

struct Stage2Eval {
  double loss = 0;
  FeatureVector predicted_k;
};

Stage2Eval stage2_loss(const Stage2Example& e, const Model& model) {
  ScoredTable scored(*e.table, model);
  SolveOptions opt;
  opt.beam = model.hyper.beam;
  opt.gold_nodes = e.gold_keys;
  SolveResult y = solve(scored, opt);
  Score gold = e.gold_rule_score + e.gold_k.dot(model.w_k);
  Stage2Eval out;
  out.loss = std::max(0.0, (y.score - gold).to_double());
  if (out.loss > 0) out.predicted_k = concept_features(*e.table, y.derivation.steps);
  return out;
}

double stage2_objective(const std::vector<Stage2Example>& xs, const Model& model) {
  double hinge = 0;
  for (const auto& e : xs) hinge += stage2_loss(e, model).loss;
  return 0.5 * squared_norm(model.w_k) + model.hyper.C * hinge;
}

bool same_value(const WordProblem& p, const Expression& a, const Expression& b) {
  const auto values = p.values();
  try {
    return evaluate(a, values) == evaluate(b, values);
  } catch (const std::exception&) {
    return false;
  }
}

void warn(TrainingLog* log, std::string msg) {
  if (log) log->warnings.push_back(std::move(msg));
}

}  // namespace

// ---------------------------------------------------------------------------

ConceptMap annotate_concepts(const WordProblem& p, const Expression& gold, const std::set<std::size_t>& rates,
                             const Resources& res, const ConceptMap& given) {
  ConceptMap out;
  // Representatives use the annotated rates for Dim nodes.
  auto rep_of = [&](Concept c, std::size_t a, std::size_t b) {
    if (c == Concept::DimensionalAnalysis) {
      if (!rates.contains(a)) return a;
      return rates.contains(b) ? a : b;
    }
    return combine_representative(c, a, b, p);
  };
  auto lemma = [&](std::size_t q) -> std::optional<std::string> {
    const auto& v = p.quantities.at(q).schema.verb;
    if (!v) return std::nullopt;
    return res.rules.lemma(p.tokens.at(*v).lower);
  };
  auto rec = [&](auto&& self, const Expression& e) -> std::size_t {
    if (e.is_leaf()) return e.quantity();
    std::size_t a = self(self, e.left());
    std::size_t b = self(self, e.right());
    if (a > b) std::swap(a, b);
    Concept c;
    if (auto it = given.find(e.leaves()); it != given.end()) {
      c = it->second;
    } else {
      const Operation op = e.op();
      const bool multiplicative = op == Operation::Mul || op == Operation::Div || op == Operation::DivReverse;
      if (p.quantities.at(a).schema.math_term || p.quantities.at(b).schema.math_term) {
        c = Concept::ExplicitMath;
      } else if (multiplicative && (rates.contains(a) || rates.contains(b))) {
        c = Concept::DimensionalAnalysis;
      } else if (multiplicative) {
        throw AnnotationGap(p.id + ": " + render(e, p.values()) + " has neither a rate nor a math term");
      } else {
        auto la = lemma(a), lb = lemma(b);
        c = la && lb && *la == *lb ? Concept::PartWhole : Concept::Transfer;
      }
    }
    out[e.leaves()] = c;
    return rep_of(c, a, b);
  };
  rec(rec, gold);
  return out;
}

std::vector<TrainingExample> make_examples(const std::vector<WordProblem>& problems, const Resources& res,
                                           TrainingLog* log) {
  std::vector<TrainingExample> out;
  for (const auto& p : problems) {
    if (!p.gold) {
      warn(log, p.id + ": no gold solution, skipped");
      continue;
    }
    TrainingExample ex;
    ex.problem = &p;
    ex.gold = p.gold->solution;
    try {
      ex.concepts = annotate_concepts(p, ex.gold, p.gold->rate_indices, res, p.gold->concept_labels);
    } catch (const AnnotationGap& e) {
      warn(log, std::string(e.what()) + ", skipped");
      continue;
    }
    out.push_back(std::move(ex));
  }
  if (log) log->examples = out.size();
  return out;
}

std::vector<std::string> unreachable_nodes(const TrainingExample& ex, const Resources& res) {
  return prepare_stage1({ex}, res).unreachable;
}

Derivation gold_derivation(const WordProblem& p, const Expression& gold, const ConceptMap& concepts, const Model& model,
                           const Resources& res) {
  CandidateTable table(p, res);
  Derivation d;
  d.expression = gold;
  std::vector<std::string> missing;
  std::vector<LeafMask> masks;
  // Leaf masks of each node's oriented children, for the step records.
  for (const GoldNode& g : gold_nodes(p, gold, concepts)) {
    const StepCandidate* best = nullptr;
    Score best_score;
    for (const auto& c : table.at(g.rep_left, g.rep_right)) {
      if (c.kind != g.kind || c.op != g.op) continue;
      Score s = c.r.dot(model.w_r) + c.k.dot(model.w_k);
      if (!best || s > best_score) {
        best = &c;
        best_score = s;
      }
    }
    if (!best) {
      missing.push_back(p.id + ": " + g.label);
      continue;
    }
    d.steps.push_back({g.mask, g.kind, res.catalog.rules()[best->rule_index].id, g.rep_left, g.rep_right, g.op});
  }
  if (!missing.empty()) throw ReachabilityError(std::move(missing));
  return d;
}

Score gold_score(const WordProblem& p, const Expression& gold, const ConceptMap& concepts, const Model& model,
                 const Resources& res) {
  return score_derivation(p, gold_derivation(p, gold, concepts, model, res), model, res);
}

double rule_objective(const std::vector<TrainingExample>& data, const WeightVector& w_r, const Resources& res,
                      const Hyperparams& hyper) {
  return stage1_objective(prepare_stage1(data, res), w_r, hyper.C);
}

WeightVector train_rule_weights(const std::vector<TrainingExample>& data, const Resources& res,
                                const Hyperparams& hyper, TrainingLog* log, TrainOptions opt) {
  WeightVector w;
  Stage1Data d = prepare_stage1(data, res);
  if (!d.unreachable.empty()) {
    if (opt.strict) throw ReachabilityError(d.unreachable);
    for (const auto& u : d.unreachable) warn(log, "unreachable node skipped in rule training: " + u);
  }
  if (log) log->stage1_nodes = d.nodes.size();
  if (d.nodes.empty() || hyper.C <= 0) return w;

  const double n = static_cast<double>(d.nodes.size());
  const double lambda = 1.0 / (hyper.C * n);
  // Any minimizer satisfies lambda/2 |w|^2 <= F(0), where F is the objective scaled by 1/(C n).
  const double radius = std::sqrt(2.0 * stage1_objective(d, w, hyper.C) / (hyper.C * n) / lambda);

  std::vector<std::size_t> order(d.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(hyper.seed);
  double current = stage1_objective(d, w, hyper.C);
  std::size_t t = 0;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    WeightVector saved = w;
    stable_shuffle(order, rng);
    for (std::size_t i : order) {
      ++t;
      const NodeInstance& node = d.nodes[i];
      LatentArgmax a = latent_argmax(node, w);
      scale(w, 1.0 - 1.0 / static_cast<double>(t));
      if (a.loss > 0 && a.predicted != a.gold) {
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        add_scaled(w, node.all[a.gold]->r, eta);
        add_scaled(w, node.all[a.predicted]->r, -eta);
      }
      project(w, radius);
    }
    double next = stage1_objective(d, w, hyper.C);
    bool accepted = next <= current;
    if (accepted) {
      current = next;
    } else {
      w = std::move(saved);
    }
    if (log) {
      std::size_t right = 0;
      for (const auto& node : d.nodes) {
        LatentArgmax a = latent_argmax(node, w);
        double best = -INFINITY;
        std::size_t arg = 0;
        for (std::size_t k = 0; k < node.all.size(); ++k) {
          double s = node.all[k]->r.dot_double(w);
          if (s > best) {
            best = s;
            arg = k;
          }
        }
        (void)a;
        right += node.delta[arg] == 0 ? 1 : 0;
      }
      log->epochs.push_back({1, epoch, current, accepted, static_cast<double>(right) / n});
    }
  }
  std::erase_if(w, [](const auto& kv) { return kv.second == 0.0; });
  return w;
}

WeightVector train_concept_weights(const std::vector<TrainingExample>& data, const WeightVector& w_r,
                                   const Resources& res, const Hyperparams& hyper, TrainingLog* log) {
  Model model;
  model.w_r = w_r;
  model.hyper = hyper;

  std::vector<Stage2Example> xs;
  for (const auto& ex : data) {
    const WordProblem& p = *ex.problem;
    auto relevant = relevant_quantities(p, res);
    LeafMask relevant_mask = 0;
    for (auto q : relevant) relevant_mask |= LeafMask{1} << q;
    if (relevant_mask != ex.gold.leaves()) {
      warn(log, p.id + ": gold leaves differ from the relevant quantities, skipped in concept training");
      continue;
    }
    Derivation gd;
    try {
      gd = gold_derivation(p, ex.gold, ex.concepts, model, res);
    } catch (const ReachabilityError&) {
      warn(log, p.id + ": gold derivation unreachable, skipped in concept training");
      continue;
    }
    Stage2Example e;
    e.ex = &ex;
    e.table = std::make_unique<CandidateTable>(p, res);
    e.gold_keys = node_keys(ex.gold);
    for (const auto& s : gd.steps) {
      for (const auto& c : e.table->at(s.rep_left, s.rep_right)) {
        if (c.kind == s.kind && res.catalog.rules()[c.rule_index].id == s.rule_id) {
          e.gold_rule_score += c.r.dot(w_r);
          break;
        }
      }
    }
    e.gold_k = concept_features(*e.table, gd.steps);
    xs.push_back(std::move(e));
  }
  if (xs.empty() || hyper.C <= 0) return {};

  const double n = static_cast<double>(xs.size());
  const double lambda = 1.0 / (hyper.C * n);
  double current = stage2_objective(xs, model);
  const double radius = std::sqrt(2.0 * current / (hyper.C * n) / lambda);

  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t t = 0;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    WeightVector saved = model.w_k;
    stable_shuffle(order, rng);
    for (std::size_t i : order) {
      ++t;
      Stage2Eval ev = stage2_loss(xs[i], model);
      scale(model.w_k, 1.0 - 1.0 / static_cast<double>(t));
      if (ev.loss > 0) {
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        add_scaled(model.w_k, xs[i].gold_k, eta);
        add_scaled(model.w_k, ev.predicted_k, -eta);
      }
      project(model.w_k, radius);
    }
    double next = stage2_objective(xs, model);
    bool accepted = next <= current;
    if (accepted) {
      current = next;
    } else {
      model.w_k = std::move(saved);
    }
    if (log) {
      std::vector<TrainingExample> used;
      for (const auto& e : xs) used.push_back(*e.ex);
      log->epochs.push_back({2, epoch, current, accepted, training_accuracy(used, model, res)});
    }
  }
  std::erase_if(model.w_k, [](const auto& kv) { return kv.second == 0.0; });
  return model.w_k;
}

Model train(const std::vector<WordProblem>& problems, const Resources& res, const Hyperparams& hyper, TrainingLog* log,
            TrainOptions opt) {
  Model model;
  model.hyper = hyper;
  auto data = make_examples(problems, res, log);
  model.w_r = train_rule_weights(data, res, hyper, log, opt);
  model.w_k = train_concept_weights(data, model.w_r, res, hyper, log);
  for (const auto& p : problems) {
    CandidateTable table(p, res);
    for (std::size_t i = 0; i < p.quantities.size(); ++i)
      for (std::size_t j = i + 1; j < p.quantities.size(); ++j)
        for (const auto& c : table.at(i, j)) {
          for (const auto& [k, v] : c.r.entries()) model.feature_dictionary.insert(k);
          for (const auto& [k, v] : c.k.entries()) model.feature_dictionary.insert(k);
        }
  }
  return model;
}

double training_accuracy(const std::vector<TrainingExample>& data, const Model& model, const Resources& res) {
  if (data.empty()) return 0.0;
  std::size_t right = 0;
  for (const auto& ex : data) {
    try {
      auto y = solve(*ex.problem, model, res, model.hyper.beam);
      if (same_value(*ex.problem, y.expression(), ex.gold)) ++right;
    } catch (const NoDerivation&) {
    }
  }
  return static_cast<double>(right) / static_cast<double>(data.size());
}

}  // namespace wps
