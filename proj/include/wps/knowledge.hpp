#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "wps/extraction.hpp"
#include "wps/problem.hpp"

namespace wps {

enum class VerbClass : std::uint8_t { Have, Get, Give, Construct, Destroy };
inline constexpr std::array<VerbClass, 5> kAllVerbClasses = {VerbClass::Have, VerbClass::Get, VerbClass::Give,
                                                             VerbClass::Construct, VerbClass::Destroy};
std::string_view to_string(VerbClass c);
std::optional<VerbClass> parse_verb_class(std::string_view name);

enum class PartWholeRelation : std::uint8_t { Sibling, Hyponym, Hypernym };
std::string_view to_string(PartWholeRelation r);

/// Seed verbs per class plus a dense embedding table used to place unseen verbs.
class VerbLexicon {
 public:
  VerbLexicon() = default;
  /// Throws std::invalid_argument when a seed lacks an embedding.
  VerbLexicon(std::vector<std::pair<std::string, VerbClass>> seeds,
              std::unordered_map<std::string, std::vector<double>> embeddings);
  static VerbLexicon load(const std::filesystem::path& seeds, const std::filesystem::path& embeddings);

  /// Exact seed match, else nearest seed by cosine, else by normalized edit distance.
  VerbClass classify(std::string_view lemma) const;

  const std::vector<std::pair<std::string, VerbClass>>& seeds() const noexcept { return seeds_; }
  bool has_embedding(std::string_view verb) const { return embeddings_.contains(std::string(verb)); }

 private:
  std::vector<std::pair<std::string, VerbClass>> seeds_;
  std::unordered_map<std::string, std::vector<double>> embeddings_;
};

/// Transfer gate groups: GET and CONSTRUCT act alike, as do GIVE and DESTROY.
enum class VerbGroup : std::uint8_t { Have, GetCon, GiveDes };
VerbGroup group_of(VerbClass c);

enum class Arg : std::uint8_t { Subj, IObj, Unit, Rate };
std::string_view to_string(Arg a);

/// Argument of the left quantity paired with an argument of the right one.
struct CorefSlot {
  Arg left;
  Arg right;
};

struct TransferGate {
  VerbGroup verb1;
  VerbGroup verb2;
  bool mirrored = false;
};
enum class RateGate : std::uint8_t { Either, Right, Left };
struct DimGate {
  RateGate rate;
};
enum class MathSide : std::uint8_t { Either, Left, Right };
struct ExplicitGate {
  MathClass cls;
  MathSide side;
};
struct PartWholeGate {
  PartWholeRelation relation;
};
using Gate = std::variant<TransferGate, DimGate, ExplicitGate, PartWholeGate>;

struct Rule {
  std::string id;  ///< "T1".."T18", "D1".."D3", "E1".."E7", "P1".."P3"
  Concept kind = Concept::Transfer;
  Gate gate;
  std::vector<CorefSlot> coref_slots;
  /// Nominal output. Mirrored transfer rules fall back to their base
  /// operation when either verb is CONSTRUCT or DESTROY.
  Operation output = Operation::Add;
};

/// The fixed 31-rule catalog. Rules of one concept are contiguous.
class RuleCatalog {
 public:
  RuleCatalog();

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::span<const Rule> of(Concept c) const;
  /// Throws UnknownRule.
  const Rule& find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
  std::size_t count(Concept c) const { return of(c).size(); }

  /// Operation a transfer rule yields for concrete verb classes.
  static Operation transfer_output(const Rule& rule, VerbClass v1, VerbClass v2);

 private:
  std::vector<Rule> rules_;
  std::array<std::pair<std::size_t, std::size_t>, 4> ranges_{};
};

/// Everything the knowledge layer consults, loaded once and shared read-only.
struct Resources {
  ExtractionRules rules;
  VerbLexicon verbs;
  RuleCatalog catalog;

  static Resources load(const LexiconPaths& paths, std::size_t window = 3);
};

std::optional<MathClass> classify_math_term(const std::vector<std::string>& phrase, const ExtractionRules& rules);

/// Class of a quantity's dependent verb, if it has one.
std::optional<VerbClass> verb_class_of(const WordProblem& problem, const Quantity& q, const Resources& res);

struct PartWholeInfo {
  PartWholeRelation relation;
  /// Cue words (part or whole) present in the sentences of either quantity or the question.
  std::vector<std::string> cues;
};

/// Relation between the units of q1 and q2; Hypernym means q1 is the whole.
std::optional<PartWholeInfo> part_whole_relation(const Quantity& q1, const Quantity& q2, const WordProblem& problem,
                                                 const ExtractionRules& rules);

/// Raw material for one coreference slot. Missing arguments leave the side empty.
struct SlotEvidence {
  CorefSlot slot;
  std::optional<std::vector<std::string>> left;
  std::optional<std::vector<std::string>> right;
  bool pronoun = false;  ///< either argument is a pronoun
};

struct RuleApplication {
  const Rule* rule = nullptr;
  std::size_t rule_index = 0;  ///< position in the catalog
  Operation op = Operation::Add;
  std::vector<SlotEvidence> evidence;
  std::optional<PartWholeInfo> part_whole;
};

/// Every rule of `concept` whose hard gates pass for the ordered pair
/// (left, right). Coreference never gates.
std::vector<RuleApplication> applicable_rules(Concept kind, const Quantity& left, const Quantity& right,
                                              const WordProblem& problem, const Resources& res);

}  // namespace wps
