#include "wps/corpus.hpp"

#include <fstream>
#include <istream>
#include <json.hpp>

#include "wps/errors.hpp"

namespace wps {

namespace {

using nlohmann::json;

Rational json_value(const json& v, std::size_t line) {
  std::string text = v.is_string() ? v.get<std::string>() : v.dump();
  auto r = Rational::parse(text);
  if (!r) throw ParseError("not a number: " + text, line);
  return *r;
}

void collect_postorder(const Expression& e, std::vector<LeafMask>& out) {
  if (e.is_leaf()) return;
  collect_postorder(e.left(), out);
  collect_postorder(e.right(), out);
  out.push_back(e.leaves());
}

// Occurrence of `phrase` nearest to the quantity, preferring its own sentence.
std::optional<Span> locate(const WordProblem& p, const Quantity& q, const std::vector<Token>& phrase) {
  if (phrase.empty()) return std::nullopt;
  auto search = [&](const Span& s) -> std::optional<Span> {
    std::optional<Span> best;
    std::size_t best_dist = SIZE_MAX;
    for (std::size_t i = s.begin; i + phrase.size() <= s.end; ++i) {
      bool ok = true;
      for (std::size_t k = 0; k < phrase.size() && ok; ++k) ok = p.tokens[i + k].lower == phrase[k].lower;
      if (!ok) continue;
      std::size_t d = i < q.tokens.begin ? q.tokens.begin - i : i - q.tokens.begin;
      if (d < best_dist) {
        best_dist = d;
        best = Span{i, i + phrase.size()};
      }
    }
    return best;
  };
  if (auto s = search(p.sentence_of(q.tokens.begin))) return s;
  return search(Span{0, p.tokens.size()});
}

void apply_overrides(WordProblem& p, const json& schemas, const Resources& res, std::size_t line) {
  if (!schemas.is_object()) throw ParseError("'schemas' must be an object", line);
  for (const auto& [key, fields] : schemas.items()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(key);
    } catch (const std::exception&) {
      throw ParseError("schema key '" + key + "' is not an index", line);
    }
    if (idx == 0 || idx > p.quantities.size()) throw ParseError("schema index " + key + " out of range", line);
    Quantity& q = p.quantities[idx - 1];
    if (!fields.is_object()) throw ParseError("schema " + key + " must be an object", line);
    for (const auto& [field, value] : fields.items()) {
      std::optional<Span> span;
      if (!value.is_null()) {
        if (!value.is_string()) throw ParseError("schema field '" + field + "' must be a string or null", line);
        auto phrase = tokenize(value.get<std::string>(), res.rules.abbreviations);
        span = locate(p, q, phrase);
        if (!span) throw ParseError("schema " + key + "." + field + " '" + value.get<std::string>() + "' not in text", line);
      }
      auto& s = q.schema;
      if (field == "subject") s.subject = span;
      else if (field == "indirect_object") s.indirect_object = span;
      else if (field == "unit") s.unit = span;
      else if (field == "rate") s.rate = span;
      else if (field == "verb") {
        if (span && span->size() != 1) throw ParseError("schema verb must be one word", line);
        s.verb = span ? std::optional<std::size_t>(span->begin) : std::nullopt;
      } else if (field == "math_term") {
        if (!span) {
          s.math_term.reset();
        } else {
          auto cls = classify_math_term(p.words(*span), res.rules);
          if (!cls) throw ParseError("schema math_term '" + value.get<std::string>() + "' matches no pattern", line);
          s.math_term = MathTerm{*span, *cls};
        }
      } else {
        throw ParseError("unknown schema field '" + field + "'", line);
      }
    }
  }
}

}  // namespace

WordProblem parse_problem(std::string_view json_line, const Resources& res, std::size_t line) {
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", line);
  if (!j.contains("id") || !j["id"].is_string()) throw ParseError("missing string field 'id'", line);
  if (!j.contains("text") || !j["text"].is_string()) throw ParseError("missing string field 'text'", line);

  WordProblem p = build_problem(j["id"].get<std::string>(), j["text"].get<std::string>(), res.rules);
  if (j.contains("source") && j["source"].is_string()) p.source = j["source"].get<std::string>();

  if (j.contains("numbers")) {
    if (!j["numbers"].is_array()) throw ParseError("'numbers' must be a list", line);
    std::vector<Quantity> kept;
    std::size_t next = 0;
    for (const auto& v : j["numbers"]) {
      Rational want = json_value(v, line);
      while (next < p.quantities.size() && p.quantities[next].value != want) ++next;
      if (next == p.quantities.size()) throw ParseError("number " + want.to_string() + " not found in text order", line);
      kept.push_back(p.quantities[next++]);
    }
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i].index = i;
    p.quantities = std::move(kept);
    for (auto& q : p.quantities) q.schema = extract_schema(p, q, res.rules);
  }
  if (p.quantities.size() > kMaxQuantities) throw ParseError("too many quantities", line);

  if (j.contains("schemas")) apply_overrides(p, j["schemas"], res, line);

  if (j.contains("solution") && !j["solution"].is_null()) {
    if (!j["solution"].is_string()) throw ParseError("'solution' must be a string", line);
    ParsedExpression parsed;
    try {
      parsed = parse_expression(j["solution"].get<std::string>());
    } catch (const ParseError& e) {
      throw ParseError(std::string("solution: ") + e.what(), line);
    }
    GoldAnnotation gold;
    gold.solution = parsed.expr;
    for (const auto& [idx, value] : parsed.leaf_values) {
      if (idx >= p.quantities.size()) throw ParseError("solution index " + std::to_string(idx + 1) + " out of range", line);
      if (p.quantities[idx].value != value)
        throw ParseError("solution value " + value.to_string() + " does not match number " + std::to_string(idx + 1) +
                             " (" + p.quantities[idx].value.to_string() + ")",
                         line);
    }
    if (j.contains("rates")) {
      for (const auto& v : j["rates"]) {
        if (!v.is_number_unsigned() || v.get<std::size_t>() == 0 || v.get<std::size_t>() > p.quantities.size())
          throw ParseError("rate index out of range", line);
        gold.rate_indices.insert(v.get<std::size_t>() - 1);
      }
    }
    if (j.contains("concepts")) {
      std::vector<LeafMask> nodes;
      collect_postorder(gold.solution, nodes);
      const auto& cs = j["concepts"];
      if (!cs.is_array() || cs.size() != nodes.size())
        throw ParseError("'concepts' needs one label per internal node (" + std::to_string(nodes.size()) + ")", line);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto c = cs[i].is_string() ? parse_concept(cs[i].get<std::string>()) : std::nullopt;
        if (!c) throw ParseError("unknown concept " + cs[i].dump(), line);
        gold.concept_labels[nodes[i]] = *c;
      }
    }
    p.gold = std::move(gold);
  }

  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
  return p;
}

std::vector<WordProblem> read_corpus(std::istream& in, const Resources& res) {
  std::vector<WordProblem> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_problem(line, res, line_no));
  }
  return out;
}

std::vector<WordProblem> load_corpus(const std::filesystem::path& path, const Resources& res) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  return read_corpus(in, res);
}

std::string problem_to_json(const WordProblem& p) {
  json j = json::object();
  j["id"] = p.id;
  j["text"] = p.text;
  json numbers = json::array();
  for (const auto& q : p.quantities) numbers.push_back(q.value.to_string());
  j["numbers"] = numbers;
  if (p.gold) {
    j["solution"] = render(p.gold->solution, p.values());
    json rates = json::array();
    for (auto r : p.gold->rate_indices) rates.push_back(r + 1);
    j["rates"] = rates;
    if (!p.gold->concept_labels.empty()) {
      std::vector<LeafMask> nodes;
      collect_postorder(normalize_division(p.gold->solution), nodes);
      bool complete = true;
      json cs = json::array();
      for (auto m : nodes) {
        auto it = p.gold->concept_labels.find(m);
        if (it == p.gold->concept_labels.end()) {
          complete = false;
          break;
        }
        cs.push_back(std::string(to_string(it->second)));
      }
      if (complete) j["concepts"] = cs;
    }
  }
  if (!p.source.empty()) j["source"] = p.source;
  return j.dump();
}

}  // namespace wps
