#include "wps/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "wps/errors.hpp"

namespace wps {

namespace {

constexpr Operation kTransferOps[9] = {Operation::Sub, Operation::Add, Operation::Sub,  //
                                       Operation::Sub, Operation::Add, Operation::Sub,  //
                                       Operation::Add, Operation::Sub, Operation::Add};

Operation flip(Operation op) { return op == Operation::Add ? Operation::Sub : Operation::Add; }

bool constructive(VerbClass c) { return c == VerbClass::Construct || c == VerbClass::Destroy; }

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / std::sqrt(na * nb);
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  std::size_t longest = std::max(a.size(), b.size());
  return longest == 0 ? 0.0 : static_cast<double>(prev[b.size()]) / static_cast<double>(longest);
}

std::set<std::string> modifiers(const std::vector<std::string>& words) {
  if (words.empty()) return {};
  return {words.begin(), words.end() - 1};
}

bool span_has_any(const WordProblem& p, const Span& s, const WordSet& cues) {
  for (std::size_t i = s.begin; i < s.end; ++i)
    if (cues.contains(p.tokens[i].lower)) return true;
  return false;
}

std::optional<Span> argument(const QuantitySchema& s, Arg a) {
  switch (a) {
    case Arg::Subj: return s.subject;
    case Arg::IObj: return s.indirect_object;
    case Arg::Unit: return s.unit;
    case Arg::Rate: return s.rate;
  }
  return std::nullopt;
}

bool has_pronoun(const WordProblem& p, const std::optional<Span>& s, const ExtractionRules& r) {
  if (!s) return false;
  for (std::size_t i = s->begin; i < s->end; ++i)
    if (r.pronouns.contains(p.tokens[i].lower)) return true;
  return false;
}

bool math_in(const QuantitySchema& s, MathClass c) { return s.math_term && s.math_term->cls == c; }

}  // namespace

std::string_view to_string(VerbClass c) {
  switch (c) {
    case VerbClass::Have: return "HAVE";
    case VerbClass::Get: return "GET";
    case VerbClass::Give: return "GIVE";
    case VerbClass::Construct: return "CONSTRUCT";
    case VerbClass::Destroy: return "DESTROY";
  }
  return "?";
}

std::optional<VerbClass> parse_verb_class(std::string_view name) {
  for (VerbClass c : kAllVerbClasses)
    if (to_string(c) == name) return c;
  return std::nullopt;
}

std::string_view to_string(PartWholeRelation r) {
  switch (r) {
    case PartWholeRelation::Sibling: return "Sibling";
    case PartWholeRelation::Hyponym: return "Hyponym";
    case PartWholeRelation::Hypernym: return "Hypernym";
  }
  return "?";
}

std::string_view to_string(Arg a) {
  switch (a) {
    case Arg::Subj: return "Subj";
    case Arg::IObj: return "IObj";
    case Arg::Unit: return "Unit";
    case Arg::Rate: return "Rate";
  }
  return "?";
}

VerbGroup group_of(VerbClass c) {
  switch (c) {
    case VerbClass::Have: return VerbGroup::Have;
    case VerbClass::Get:
    case VerbClass::Construct: return VerbGroup::GetCon;
    case VerbClass::Give:
    case VerbClass::Destroy: return VerbGroup::GiveDes;
  }
  return VerbGroup::Have;
}

// ---------------------------------------------------------------------------
// Verb lexicon

VerbLexicon::VerbLexicon(std::vector<std::pair<std::string, VerbClass>> seeds,
                         std::unordered_map<std::string, std::vector<double>> embeddings)
    : seeds_(std::move(seeds)), embeddings_(std::move(embeddings)) {
  for (const auto& [verb, cls] : seeds_)
    if (!embeddings_.contains(verb)) throw std::invalid_argument("seed verb '" + verb + "' has no embedding");
}

VerbLexicon VerbLexicon::load(const std::filesystem::path& seeds_path, const std::filesystem::path& embeddings_path) {
  std::vector<std::pair<std::string, VerbClass>> seeds;
  for (const auto& row : read_tsv(seeds_path, 2)) {
    auto cls = parse_verb_class(row[0]);
    if (!cls) throw ParseError("unknown verb class '" + row[0] + "' in " + seeds_path.string());
    seeds.emplace_back(to_lower(row[1]), *cls);
  }
  std::unordered_map<std::string, std::vector<double>> embeddings;
  for (const auto& row : read_tsv(embeddings_path, 2)) {
    std::istringstream in(row[1]);
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    if (v.empty()) throw ParseError("empty embedding for '" + row[0] + "' in " + embeddings_path.string());
    embeddings.emplace(to_lower(row[0]), std::move(v));
  }
  return VerbLexicon(std::move(seeds), std::move(embeddings));
}

VerbClass VerbLexicon::classify(std::string_view lemma) const {
  if (seeds_.empty()) throw std::logic_error("verb lexicon has no seeds");
  std::string verb = to_lower(lemma);
  for (const auto& [seed, cls] : seeds_)
    if (seed == verb) return cls;
  if (auto it = embeddings_.find(verb); it != embeddings_.end()) {
    double best = -2;
    VerbClass out = seeds_.front().second;
    for (const auto& [seed, cls] : seeds_) {
      double c = cosine(it->second, embeddings_.at(seed));
      if (c > best) {
        best = c;
        out = cls;
      }
    }
    return out;
  }
  double best = 2;
  VerbClass out = seeds_.front().second;
  for (const auto& [seed, cls] : seeds_) {
    double d = normalized_edit_distance(verb, seed);
    if (d < best) {
      best = d;
      out = cls;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

RuleCatalog::RuleCatalog() {
  const VerbGroup groups[3] = {VerbGroup::Have, VerbGroup::GetCon, VerbGroup::GiveDes};
  for (int mirrored = 0; mirrored < 2; ++mirrored) {
    for (int i = 0; i < 9; ++i) {
      Rule r;
      r.id = "T" + std::to_string(i + 1 + 9 * mirrored);
      r.kind = Concept::Transfer;
      r.gate = TransferGate{groups[i / 3], groups[i % 3], mirrored == 1};
      if (mirrored) {
        r.coref_slots = {{Arg::Subj, Arg::IObj}, {Arg::IObj, Arg::Subj}};
        r.output = flip(kTransferOps[i]);
      } else {
        r.coref_slots = {{Arg::Subj, Arg::Subj}};
        r.output = kTransferOps[i];
      }
      rules_.push_back(std::move(r));
    }
  }
  rules_.push_back({"D1", Concept::DimensionalAnalysis, DimGate{RateGate::Either},
                    {{Arg::Unit, Arg::Rate}, {Arg::Rate, Arg::Unit}}, Operation::Mul});
  rules_.push_back({"D2", Concept::DimensionalAnalysis, DimGate{RateGate::Right}, {{Arg::Unit, Arg::Unit}}, Operation::Div});
  rules_.push_back({"D3", Concept::DimensionalAnalysis, DimGate{RateGate::Left}, {{Arg::Unit, Arg::Unit}},
                    Operation::DivReverse});

  const std::vector<CorefSlot> cross = {{Arg::Subj, Arg::IObj}, {Arg::IObj, Arg::Subj}};
  const std::vector<CorefSlot> same = {{Arg::Subj, Arg::Subj}};
  rules_.push_back({"E1", Concept::ExplicitMath, ExplicitGate{MathClass::Add, MathSide::Either}, cross, Operation::Add});
  rules_.push_back({"E2", Concept::ExplicitMath, ExplicitGate{MathClass::Sub, MathSide::Either}, cross, Operation::Sub});
  rules_.push_back({"E3", Concept::ExplicitMath, ExplicitGate{MathClass::Add, MathSide::Either}, same, Operation::Sub});
  rules_.push_back({"E4", Concept::ExplicitMath, ExplicitGate{MathClass::Sub, MathSide::Either}, same, Operation::Add});
  rules_.push_back({"E5", Concept::ExplicitMath, ExplicitGate{MathClass::Mul, MathSide::Left}, same,
                    Operation::DivReverse});
  rules_.push_back({"E6", Concept::ExplicitMath, ExplicitGate{MathClass::Mul, MathSide::Right}, same, Operation::Div});
  rules_.push_back({"E7", Concept::ExplicitMath, ExplicitGate{MathClass::Mul, MathSide::Either}, cross, Operation::Mul});

  rules_.push_back({"P1", Concept::PartWhole, PartWholeGate{PartWholeRelation::Sibling}, {}, Operation::Add});
  rules_.push_back({"P2", Concept::PartWhole, PartWholeGate{PartWholeRelation::Hyponym}, {}, Operation::Sub});
  rules_.push_back({"P3", Concept::PartWhole, PartWholeGate{PartWholeRelation::Hypernym}, {}, Operation::Sub});

  // Concept order in the vector: Transfer, Dim, Explicit, PartWhole.
  auto range = [&](Concept c) {
    auto first = std::find_if(rules_.begin(), rules_.end(), [&](const Rule& r) { return r.kind == c; });
    auto last = std::find_if(first, rules_.end(), [&](const Rule& r) { return r.kind != c; });
    return std::pair<std::size_t, std::size_t>(first - rules_.begin(), last - rules_.begin());
  };
  for (Concept c : kAllConcepts) ranges_[static_cast<std::size_t>(c)] = range(c);

  if (count(Concept::Transfer) != 18 || count(Concept::DimensionalAnalysis) != 3 ||
      count(Concept::ExplicitMath) != 7 || count(Concept::PartWhole) != 3)
    throw std::logic_error("rule catalog census mismatch");
}

std::span<const Rule> RuleCatalog::of(Concept c) const {
  auto [b, e] = ranges_[static_cast<std::size_t>(c)];
  return std::span<const Rule>(rules_).subspan(b, e - b);
}

const Rule& RuleCatalog::find(std::string_view id) const { return rules_[index_of(id)]; }

std::size_t RuleCatalog::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < rules_.size(); ++i)
    if (rules_[i].id == id) return i;
  throw UnknownRule(std::string(id));
}

Operation RuleCatalog::transfer_output(const Rule& rule, VerbClass v1, VerbClass v2) {
  const auto* g = std::get_if<TransferGate>(&rule.gate);
  if (!g) throw std::invalid_argument("not a transfer rule: " + rule.id);
  if (g->mirrored && (constructive(v1) || constructive(v2))) return flip(rule.output);
  return rule.output;
}

Resources Resources::load(const LexiconPaths& paths, std::size_t window) {
  Resources res;
  res.rules = ExtractionRules::load(paths, window);
  res.verbs = VerbLexicon::load(paths.verb_seeds, paths.verb_embeddings);
  return res;
}

// ---------------------------------------------------------------------------
// Predicates

std::optional<MathClass> classify_math_term(const std::vector<std::string>& phrase, const ExtractionRules& rules) {
  return rules.math_terms.classify(phrase);
}

std::optional<VerbClass> verb_class_of(const WordProblem& problem, const Quantity& q, const Resources& res) {
  if (!q.schema.verb) return std::nullopt;
  return res.verbs.classify(res.rules.lemma(problem.tokens.at(*q.schema.verb).lower));
}

std::optional<PartWholeInfo> part_whole_relation(const Quantity& q1, const Quantity& q2, const WordProblem& p,
                                                 const ExtractionRules& r) {
  if (!q1.schema.unit || !q2.schema.unit) return std::nullopt;
  auto w1 = normalized_words(p, *q1.schema.unit, r);
  auto w2 = normalized_words(p, *q2.schema.unit, r);
  if (w1.empty() || w2.empty() || w1.back() != w2.back()) return std::nullopt;

  const Span s1 = p.sentence_of(q1.tokens.begin);
  const Span s2 = p.sentence_of(q2.tokens.begin);
  const bool same_sentence = s1 == s2;
  const bool part1 = !same_sentence && span_has_any(p, s1, r.part_cues);
  const bool part2 = !same_sentence && span_has_any(p, s2, r.part_cues);
  const bool whole1 = !same_sentence && span_has_any(p, s1, r.whole_cues);
  const bool whole2 = !same_sentence && span_has_any(p, s2, r.whole_cues);
  const auto m1 = modifiers(w1);
  const auto m2 = modifiers(w2);

  std::optional<PartWholeRelation> rel;
  if (part1 != part2) {
    rel = part2 ? PartWholeRelation::Hypernym : PartWholeRelation::Hyponym;
  } else if (whole1 != whole2) {
    rel = whole1 ? PartWholeRelation::Hypernym : PartWholeRelation::Hyponym;
  } else if (m1 != m2 && std::includes(m2.begin(), m2.end(), m1.begin(), m1.end())) {
    rel = PartWholeRelation::Hypernym;
  } else if (m1 != m2 && std::includes(m1.begin(), m1.end(), m2.begin(), m2.end())) {
    rel = PartWholeRelation::Hyponym;
  } else if (m1 != m2) {
    rel = PartWholeRelation::Sibling;
  } else if (span_has_any(p, p.question, r.whole_cues)) {
    rel = PartWholeRelation::Sibling;
  }
  if (!rel) return std::nullopt;

  std::set<std::string> cues;
  for (const Span& s : {s1, s2, p.question})
    for (std::size_t i = s.begin; i < s.end; ++i)
      if (r.part_cues.contains(p.tokens[i].lower) || r.whole_cues.contains(p.tokens[i].lower))
        cues.insert(p.tokens[i].lower);
  return PartWholeInfo{*rel, {cues.begin(), cues.end()}};
}

std::vector<RuleApplication> applicable_rules(Concept kind, const Quantity& left, const Quantity& right,
                                              const WordProblem& problem, const Resources& res) {
  std::vector<RuleApplication> out;
  const auto& ls = left.schema;
  const auto& rs = right.schema;

  std::optional<VerbClass> v1, v2;
  std::optional<PartWholeInfo> pw;
  if (kind == Concept::Transfer) {
    v1 = verb_class_of(problem, left, res);
    v2 = verb_class_of(problem, right, res);
    if (!v1 || !v2) return out;
  }
  if (kind == Concept::PartWhole) {
    pw = part_whole_relation(left, right, problem, res.rules);
    if (!pw) return out;
  }

  const std::size_t base = static_cast<std::size_t>(res.catalog.of(kind).data() - res.catalog.rules().data());
  const auto rules = res.catalog.of(kind);
  for (std::size_t k = 0; k < rules.size(); ++k) {
    const Rule& rule = rules[k];
    std::optional<Operation> op;
    std::visit(
        [&](const auto& g) {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, TransferGate>) {
            if (group_of(*v1) == g.verb1 && group_of(*v2) == g.verb2)
              op = RuleCatalog::transfer_output(rule, *v1, *v2);
          } else if constexpr (std::is_same_v<G, DimGate>) {
            bool pass = g.rate == RateGate::Either ? (ls.rate || rs.rate)
                        : g.rate == RateGate::Right ? rs.rate.has_value()
                                                    : ls.rate.has_value();
            if (pass) op = rule.output;
          } else if constexpr (std::is_same_v<G, ExplicitGate>) {
            bool pass = g.side == MathSide::Either ? (math_in(ls, g.cls) || math_in(rs, g.cls))
                        : g.side == MathSide::Left ? math_in(ls, g.cls)
                                                   : math_in(rs, g.cls);
            if (pass) op = rule.output;
          } else {
            if (pw->relation == g.relation) op = rule.output;
          }
        },
        rule.gate);
    if (!op) continue;

    RuleApplication app;
    app.rule = &rule;
    app.rule_index = base + k;
    app.op = *op;
    for (const CorefSlot& slot : rule.coref_slots) {
      SlotEvidence ev{slot, std::nullopt, std::nullopt, false};
      auto a = argument(ls, slot.left);
      auto b = argument(rs, slot.right);
      if (a) ev.left = normalized_words(problem, *a, res.rules);
      if (b) ev.right = normalized_words(problem, *b, res.rules);
      ev.pronoun = has_pronoun(problem, a, res.rules) || has_pronoun(problem, b, res.rules);
      app.evidence.push_back(std::move(ev));
    }
    if (kind == Concept::PartWhole) app.part_whole = pw;
    out.push_back(std::move(app));
  }
  return out;
}

}  // namespace wps
