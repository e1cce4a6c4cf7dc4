#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wps/problem.hpp"
#include "wps/text.hpp"

namespace wps {

/// Explicit-math phrase patterns. A "*" in a pattern matches up to two
/// arbitrary tokens ("more * than" covers "more than" and "more apples than").
class MathTermLexicon {
 public:
  struct Pattern {
    MathClass cls = MathClass::Add;
    std::vector<std::string> words;
  };

  MathTermLexicon() = default;
  explicit MathTermLexicon(std::vector<Pattern> patterns) : patterns_(std::move(patterns)) {}
  static MathTermLexicon load(const std::filesystem::path& path);

  /// Every (start, end, class) match in `words`, by start then pattern order.
  /// Overlapping matches of different patterns are all reported.
  std::vector<MathTerm> find_all(const std::vector<std::string>& words) const;
  /// Class of the first pattern matching anywhere in `words`.
  std::optional<MathClass> classify(const std::vector<std::string>& words) const;

  const std::vector<Pattern>& patterns() const noexcept { return patterns_; }

 private:
  std::optional<std::size_t> match_at(const Pattern& p, const std::vector<std::string>& words,
                                      std::size_t start) const;
  std::vector<Pattern> patterns_;
};

/// Locations of every lexicon file. `under(dir)` gives the bundled layout.
struct LexiconPaths {
  std::filesystem::path verbs;
  std::filesystem::path verb_seeds;
  std::filesystem::path verb_embeddings;
  std::filesystem::path math_terms;
  std::filesystem::path pronouns;
  std::filesystem::path determiners;
  std::filesystem::path auxiliaries;
  std::filesystem::path stopwords;
  std::filesystem::path abbreviations;
  std::filesystem::path number_words;
  std::filesystem::path part_whole_cues;
  std::filesystem::path irregular_plurals;

  static LexiconPaths under(const std::filesystem::path& lexicon_dir);
};

/// Lexicons and windows that drive the pattern cascade. All entries are lowercase.
struct ExtractionRules {
  std::map<std::string, Rational, std::less<>> number_words;
  WordSet pronouns;
  WordSet determiners;
  WordSet auxiliaries;
  WordSet stopwords;
  WordSet abbreviations;
  WordSet whole_cues;
  WordSet part_cues;
  std::unordered_map<std::string, std::string> verb_forms;  ///< surface form -> lemma
  MathTermLexicon math_terms;
  Singularizer singularize;
  std::size_t window = 3;

  static ExtractionRules load(const LexiconPaths& paths, std::size_t window = 3);

  bool is_verb(std::string_view lower) const { return verb_forms.contains(std::string(lower)); }
  /// Lemma of a verb form, or the word itself when it is not a known form.
  std::string lemma(std::string_view lower) const;
};

/// Numerals and number words, left to right, with empty schemas.
std::vector<Quantity> detect_numbers(const std::vector<Token>& tokens, const ExtractionRules& rules);
std::vector<Quantity> detect_numbers(std::string_view text, const ExtractionRules& rules);

/// Noun run after "how many"/"how much" in the question sentence.
std::optional<Span> extract_question_unit(const WordProblem& problem, const ExtractionRules& rules);

QuantitySchema extract_schema(const WordProblem& problem, const Quantity& q, const ExtractionRules& rules);

/// Words within `window` tokens of the number, inside its sentence.
std::vector<std::string> neighborhood_words(const WordProblem& problem, const Quantity& q, std::size_t window);

/// Tokenizes, detects numbers and the question, and extracts every schema.
WordProblem build_problem(std::string id, std::string text, const ExtractionRules& rules);

/// Indices whose unit head matches neither the question unit nor any other
/// quantity's unit or rate. Quantities without a unit are kept.
std::set<std::size_t> filter_irrelevant(const WordProblem& problem, const ExtractionRules& rules);

/// Lowercased, singularized content words of a span with determiners and
/// the possessive clitic removed. Used for unit matching and coreference.
std::vector<std::string> normalized_words(const WordProblem& problem, const Span& span,
                                          const ExtractionRules& rules);

/// Singular lowercase head of a span.
std::string head_noun(const WordProblem& problem, const Span& span, const ExtractionRules& rules);

}  // namespace wps
