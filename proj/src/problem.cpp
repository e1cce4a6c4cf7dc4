#include "wps/problem.hpp"

#include <stdexcept>

namespace wps {

std::string_view to_string(Concept c) {
  switch (c) {
    case Concept::Transfer: return "Transfer";
    case Concept::DimensionalAnalysis: return "Dim";
    case Concept::PartWhole: return "PartWhole";
    case Concept::ExplicitMath: return "Explicit";
  }
  return "?";
}

std::optional<Concept> parse_concept(std::string_view name) {
  if (name == "Transfer") return Concept::Transfer;
  if (name == "Dim" || name == "DimensionalAnalysis") return Concept::DimensionalAnalysis;
  if (name == "PartWhole") return Concept::PartWhole;
  if (name == "Explicit" || name == "ExplicitMath") return Concept::ExplicitMath;
  return std::nullopt;
}

std::string_view to_string(MathClass c) {
  switch (c) {
    case MathClass::Add: return "ADD";
    case MathClass::Sub: return "SUB";
    case MathClass::Mul: return "MUL";
  }
  return "?";
}

std::vector<Rational> WordProblem::values() const {
  std::vector<Rational> out;
  out.reserve(quantities.size());
  for (const auto& q : quantities) out.push_back(q.value);
  return out;
}

Span WordProblem::sentence_of(std::size_t token) const {
  for (const auto& s : sentences)
    if (s.contains(token)) return s;
  return Span{0, tokens.size()};
}

std::vector<std::string> WordProblem::words(const Span& span) const {
  std::vector<std::string> out;
  for (std::size_t i = span.begin; i < span.end && i < tokens.size(); ++i) out.push_back(tokens[i].lower);
  return out;
}

std::string WordProblem::join(const Span& span) const {
  std::string out;
  for (std::size_t i = span.begin; i < span.end && i < tokens.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i].surface;
  }
  return out;
}

void validate(const WordProblem& p) {
  auto fail = [&](const std::string& what) { throw std::invalid_argument("problem '" + p.id + "': " + what); };
  auto check_span = [&](const std::optional<Span>& s, const char* field) {
    if (s && (s->end > p.tokens.size() || s->empty())) fail(std::string(field) + " span out of bounds");
  };
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < p.quantities.size(); ++i) {
    const Quantity& q = p.quantities[i];
    if (q.index != i) fail("quantity index does not match its position");
    if (q.tokens.empty() || q.tokens.end > p.tokens.size()) fail("quantity span out of bounds");
    if (i > 0 && q.tokens.begin < last_end) fail("quantity spans overlap or are unordered");
    last_end = q.tokens.end;
    const QuantitySchema& s = q.schema;
    check_span(s.subject, "subject");
    check_span(s.indirect_object, "indirect object");
    check_span(s.unit, "unit");
    check_span(s.rate, "rate");
    if (s.math_term) check_span(s.math_term->span, "math term");
    if (s.verb && *s.verb >= p.tokens.size()) fail("verb index out of bounds");
    if (s.unit && s.rate && s.unit->overlaps(*s.rate)) fail("unit and rate overlap");
  }
  if (p.gold) {
    LeafMask present = p.quantities.size() >= kMaxQuantities ? ~LeafMask{0}
                                                              : (LeafMask{1} << p.quantities.size()) - 1;
    if (p.gold->solution.empty()) fail("gold solution is empty");
    if ((p.gold->solution.leaves() & ~present) != 0) fail("gold solution references a missing quantity");
    for (std::size_t r : p.gold->rate_indices)
      if (r >= p.quantities.size()) fail("rate index out of range");
  }
}

}  // namespace wps
