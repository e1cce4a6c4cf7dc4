#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wps/expression.hpp"
#include "wps/rational.hpp"

namespace wps {

/// Half-open token range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  bool overlaps(const Span& o) const noexcept { return begin < o.end && o.begin < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string surface;
  std::string lower;
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
};

enum class Concept : std::uint8_t { Transfer, DimensionalAnalysis, PartWhole, ExplicitMath };
inline constexpr Concept kAllConcepts[] = {Concept::Transfer, Concept::DimensionalAnalysis, Concept::PartWhole,
                                           Concept::ExplicitMath};

/// Short display names: Transfer, Dim, PartWhole, Explicit.
std::string_view to_string(Concept c);
/// Accepts the short names and the long forms ("DimensionalAnalysis", "ExplicitMath").
std::optional<Concept> parse_concept(std::string_view name);

enum class MathClass : std::uint8_t { Add, Sub, Mul };
std::string_view to_string(MathClass c);

struct MathTerm {
  Span span;
  MathClass cls = MathClass::Add;
};

/// Semantic frame of one number. Absent fields were not found, never guessed.
struct QuantitySchema {
  std::optional<Span> subject;
  std::optional<std::size_t> verb;
  std::optional<Span> indirect_object;
  std::optional<Span> unit;
  std::optional<Span> rate;
  std::optional<MathTerm> math_term;
  std::vector<std::string> neighborhood;
};

struct Quantity {
  std::size_t index = 0;
  Rational value;
  Span tokens;
  QuantitySchema schema;
};

/// Internal nodes are keyed by the leaf set beneath them.
using ConceptMap = std::map<LeafMask, Concept>;

struct GoldAnnotation {
  Expression solution;
  std::set<std::size_t> rate_indices;
  ConceptMap concept_labels;  ///< may be partial or empty
};

struct WordProblem {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<Span> sentences;
  std::vector<Quantity> quantities;
  Span question;
  std::optional<Span> question_unit;
  std::optional<GoldAnnotation> gold;
  std::string source;  ///< provenance of perturbed problems

  std::vector<Rational> values() const;
  /// Sentence containing token i.
  Span sentence_of(std::size_t token) const;
  /// Lowercase words of a span.
  std::vector<std::string> words(const Span& span) const;
  std::string join(const Span& span) const;
  /// Lowercase word of the head (last token) of a span.
  const std::string& head(const Span& span) const { return tokens.at(span.end - 1).lower; }
};

/// Checks the structural invariants (ordered non-overlapping quantities,
/// token indices in bounds, gold leaves present). Throws std::invalid_argument.
void validate(const WordProblem& problem);

}  // namespace wps
