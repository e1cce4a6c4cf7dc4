#include "wps/extraction.hpp"

#include <algorithm>
#include <cctype>

#include "wps/errors.hpp"

namespace wps {

namespace {

constexpr std::size_t kMaxPhrase = 4;

const WordSet kUnitSkip = {"more", "fewer", "less", "times", "as", "many", "much"};
const WordSet kAdverbs = {"also", "then", "now", "just", "still", "only", "already", "again",
                          "later", "not", "first", "finally", "next", "never", "too"};
const WordSet kIObjPronouns = {"him", "her", "them", "me", "us"};
const WordSet kIObjPrepositions = {"to", "from", "than", "as"};

bool capitalized(const Token& t) { return std::isupper(static_cast<unsigned char>(t.surface.front())) != 0; }

// Word that can sit inside a noun phrase. Pronouns qualify; the caller
// decides whether a run may continue past one.
bool np_token(const Token& t, const ExtractionRules& r) {
  if (t.lower == "'s" || r.abbreviations.contains(t.lower)) return true;
  if (!is_word(t.lower)) return false;
  return !r.stopwords.contains(t.lower) && !r.auxiliaries.contains(t.lower) && !r.is_verb(t.lower) &&
         !r.number_words.contains(t.lower);
}

// Unit material: a content word that is not a pronoun or determiner.
bool unit_token(const Token& t, const ExtractionRules& r) {
  return is_word(t.lower) && np_token(t, r) && !r.pronouns.contains(t.lower) && !r.determiners.contains(t.lower);
}

Span noun_run(const WordProblem& p, std::size_t start, std::size_t limit, const ExtractionRules& r) {
  std::size_t e = start;
  while (e < limit && e - start < kMaxPhrase && unit_token(p.tokens[e], r)) ++e;
  return {start, e};
}

// Noun phrase starting at `start` after optional determiners. A pronoun or
// name run stands alone.
std::optional<Span> phrase_after(const WordProblem& p, std::size_t start, std::size_t limit,
                                 const ExtractionRules& r) {
  std::size_t i = start;
  while (i < limit && r.determiners.contains(p.tokens[i].lower) && !r.pronouns.contains(p.tokens[i].lower)) ++i;
  if (i < limit && r.pronouns.contains(p.tokens[i].lower)) {
    // "her" followed by a noun is a possessive determiner.
    if (i + 1 < limit && unit_token(p.tokens[i + 1], r) && r.determiners.contains(p.tokens[i].lower)) {
      ++i;
    } else {
      return Span{i, i + 1};
    }
  }
  std::size_t e = i;
  while (e < limit && e - i < kMaxPhrase && np_token(p.tokens[e], r) && !r.pronouns.contains(p.tokens[e].lower))
    ++e;
  if (e == i) return std::nullopt;
  return Span{i, e};
}

// Noun phrase ending just before `end` (exclusive), scanning left.
std::optional<Span> phrase_before(const WordProblem& p, std::size_t end, std::size_t floor,
                                  const ExtractionRules& r) {
  if (end <= floor) return std::nullopt;
  std::size_t last = end - 1;
  if (r.pronouns.contains(p.tokens[last].lower)) return Span{last, end};
  std::size_t b = end;
  while (b > floor && end - b < kMaxPhrase && np_token(p.tokens[b - 1], r) &&
         !r.pronouns.contains(p.tokens[b - 1].lower))
    --b;
  while (b < end && p.tokens[b].lower == "'s") ++b;
  if (b == end) return std::nullopt;
  return Span{b, end};
}

bool is_quantity_token(const WordProblem& p, std::size_t i) {
  return std::any_of(p.quantities.begin(), p.quantities.end(), [&](const Quantity& q) { return q.tokens.contains(i); });
}

std::optional<std::size_t> find_verb(const WordProblem& p, const Quantity& q, const Span& s, const ExtractionRules& r) {
  for (std::size_t i = q.tokens.begin; i > s.begin; --i)
    if (r.is_verb(p.tokens[i - 1].lower)) return i - 1;
  for (std::size_t i = q.tokens.end; i < s.end; ++i)
    if (r.is_verb(p.tokens[i].lower)) return i;
  return std::nullopt;
}

std::optional<Span> find_subject(const WordProblem& p, const Quantity& q, std::optional<std::size_t> verb,
                                 const Span& s, const ExtractionRules& r) {
  std::optional<std::size_t> anchor = verb;
  if (!anchor) {
    for (std::size_t i = q.tokens.begin; i > s.begin; --i)
      if (r.auxiliaries.contains(p.tokens[i - 1].lower)) {
        anchor = i - 1;
        break;
      }
  }
  if (!anchor) return std::nullopt;
  std::size_t j = *anchor;
  // Skip auxiliaries, adverbs and "to"-infinitive chains: "Sara wants to buy".
  while (j > s.begin) {
    const auto& w = p.tokens[j - 1].lower;
    if (r.auxiliaries.contains(w) || kAdverbs.contains(w) || w == "to" || r.is_verb(w)) {
      --j;
    } else {
      break;
    }
  }
  return phrase_before(p, j, s.begin, r);
}

std::optional<Span> find_indirect_object(const WordProblem& p, const Quantity& q, std::optional<std::size_t> verb,
                                         const Span& s, const ExtractionRules& r) {
  if (verb && *verb + 1 < q.tokens.begin) {
    for (std::size_t i = *verb + 1; i < q.tokens.begin; ++i) {
      const Token& t = p.tokens[i];
      if (kIObjPronouns.contains(t.lower)) return Span{i, i + 1};
      if (capitalized(t) && np_token(t, r) && !r.pronouns.contains(t.lower)) {
        std::size_t e = i;
        while (e < q.tokens.begin && capitalized(p.tokens[e]) && np_token(p.tokens[e], r)) ++e;
        return Span{i, e};
      }
    }
  }
  for (std::size_t i = q.tokens.end; i < s.end; ++i) {
    if (is_quantity_token(p, i)) break;
    const auto& w = p.tokens[i].lower;
    if (!kIObjPrepositions.contains(w)) continue;
    if (w == "as" && i + 1 < s.end && (p.tokens[i + 1].lower == "many" || p.tokens[i + 1].lower == "much")) continue;
    if (w == "to" && i + 1 < s.end && r.is_verb(p.tokens[i + 1].lower)) continue;
    if (auto np = phrase_after(p, i + 1, s.end, r)) return np;
  }
  return std::nullopt;
}

// End of the token run that a unit phrase may follow: the number plus any
// comparative filler ("more", "times as many").
std::size_t skip_filler(const WordProblem& p, std::size_t i, std::size_t limit) {
  while (i < limit && kUnitSkip.contains(p.tokens[i].lower)) ++i;
  return i;
}

std::size_t nearest_quantity(const WordProblem& p, const Span& s, std::size_t token) {
  std::size_t best = p.quantities.size();
  std::size_t best_dist = SIZE_MAX;
  for (const auto& q : p.quantities) {
    if (!s.contains(q.tokens.begin)) continue;
    std::size_t d = 0;
    if (token < q.tokens.begin) d = q.tokens.begin - token;
    else if (token >= q.tokens.end) d = token - q.tokens.end + 1;
    if (d < best_dist) {
      best_dist = d;
      best = q.index;
    }
  }
  return best;
}

std::optional<Span> find_rate(const WordProblem& p, const Quantity& q, const std::optional<Span>& own_unit,
                              const Span& s, const ExtractionRules& r) {
  auto acceptable = [&](const Span& x) {
    if (x.empty()) return false;
    if (own_unit && own_unit->overlaps(x)) return false;
    if (p.question_unit && p.question_unit->overlaps(x)) return false;
    return true;
  };
  std::size_t after = own_unit && own_unit->begin >= q.tokens.end && s.contains(own_unit->begin)
                          ? own_unit->end
                          : q.tokens.end;
  if (after < s.end) {
    const auto& w = p.tokens[after].lower;
    if (w == "per" || w == "a" || w == "an") {
      Span x = noun_run(p, after + 1, s.end, r);
      if (acceptable(x)) return x;
    }
    if (w == "each" || w == "every") {
      // "rows of 5 pies each", "bags with 4 apples each"
      if (q.tokens.begin >= s.begin + 2) {
        const auto& prev = p.tokens[q.tokens.begin - 1].lower;
        if (prev == "of" || prev == "with") {
          std::size_t e = q.tokens.begin - 1;
          std::size_t b = e;
          while (b > s.begin && e - b < kMaxPhrase && unit_token(p.tokens[b - 1], r)) --b;
          Span x{b, e};
          if (acceptable(x)) return x;
        }
      }
    }
  }
  // "each X" / "every X" anywhere in the sentence binds to the nearest number.
  for (std::size_t i = s.begin; i + 1 < s.end; ++i) {
    const auto& w = p.tokens[i].lower;
    if (w != "each" && w != "every") continue;
    Span x = noun_run(p, i + 1, s.end, r);
    if (!acceptable(x)) continue;
    if (nearest_quantity(p, s, i) == q.index) return x;
  }
  return std::nullopt;
}

std::optional<MathTerm> find_math_term(const WordProblem& p, const Quantity& q, const Span& s,
                                       const ExtractionRules& r) {
  std::vector<std::string> words = p.words(s);
  std::size_t lo = q.tokens.begin >= s.begin + r.window ? q.tokens.begin - r.window : s.begin;
  Span window{lo, std::min(s.end, q.tokens.end + r.window)};
  for (MathTerm m : r.math_terms.find_all(words)) {
    m.span = {m.span.begin + s.begin, m.span.end + s.begin};
    if (!m.span.overlaps(window)) continue;
    if (m.span.overlaps(q.tokens) || nearest_quantity(p, s, m.span.begin) == q.index) return m;
  }
  return std::nullopt;
}

Quantity make_quantity(std::size_t index, std::size_t token, Rational value) {
  Quantity q;
  q.index = index;
  q.value = value;
  q.tokens = {token, token + 1};
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<std::size_t> MathTermLexicon::match_at(const Pattern& pat, const std::vector<std::string>& words,
                                                     std::size_t start) const {
  // Backtracking over wildcard widths 0..2; patterns are short.
  auto rec = [&](auto&& self, std::size_t pi, std::size_t wi) -> std::optional<std::size_t> {
    if (pi == pat.words.size()) return wi;
    if (pat.words[pi] == "*") {
      for (std::size_t k = 0; k <= 2 && wi + k <= words.size(); ++k)
        if (auto e = self(self, pi + 1, wi + k)) return e;
      return std::nullopt;
    }
    if (wi < words.size() && words[wi] == pat.words[pi]) return self(self, pi + 1, wi + 1);
    return std::nullopt;
  };
  return rec(rec, 0, start);
}

std::vector<MathTerm> MathTermLexicon::find_all(const std::vector<std::string>& words) const {
  std::vector<MathTerm> out;
  for (std::size_t i = 0; i < words.size(); ++i)
    for (const auto& pat : patterns_)
      if (auto e = match_at(pat, words, i)) out.push_back({Span{i, *e}, pat.cls});
  return out;
}

std::optional<MathClass> MathTermLexicon::classify(const std::vector<std::string>& words) const {
  auto all = find_all(words);
  if (all.empty()) return std::nullopt;
  return all.front().cls;
}

MathTermLexicon MathTermLexicon::load(const std::filesystem::path& path) {
  std::vector<Pattern> patterns;
  for (const auto& row : read_tsv(path, 2)) {
    Pattern p;
    if (row[0] == "ADD") p.cls = MathClass::Add;
    else if (row[0] == "SUB") p.cls = MathClass::Sub;
    else if (row[0] == "MUL") p.cls = MathClass::Mul;
    else throw ParseError("unknown math class '" + row[0] + "' in " + path.string());
    std::string word;
    for (char c : row[1] + " ") {
      if (c == ' ') {
        if (!word.empty()) p.words.push_back(to_lower(word));
        word.clear();
      } else {
        word += c;
      }
    }
    if (p.words.empty() || p.words.front() == "*" || p.words.back() == "*")
      throw ParseError("math pattern must start and end with a word: '" + row[1] + "'");
    patterns.push_back(std::move(p));
  }
  return MathTermLexicon(std::move(patterns));
}

LexiconPaths LexiconPaths::under(const std::filesystem::path& dir) {
  return {dir / "verbs.txt",        dir / "verb_seeds.tsv",      dir / "verb_embeddings.tsv",
          dir / "math_terms.tsv",   dir / "pronouns.txt",        dir / "determiners.txt",
          dir / "auxiliaries.txt",  dir / "stopwords.txt",       dir / "abbreviations.txt",
          dir / "number_words.tsv", dir / "part_whole_cues.tsv", dir / "irregular_plurals.tsv"};
}

ExtractionRules ExtractionRules::load(const LexiconPaths& paths, std::size_t window) {
  ExtractionRules r;
  r.window = window;
  for (const auto& row : read_tsv(paths.number_words, 2)) {
    auto value = Rational::parse(row[1]);
    if (!value) throw ParseError("bad number value '" + row[1] + "' in " + paths.number_words.string());
    r.number_words.emplace(to_lower(row[0]), *value);
  }
  r.pronouns = read_word_set(paths.pronouns);
  r.determiners = read_word_set(paths.determiners);
  r.auxiliaries = read_word_set(paths.auxiliaries);
  r.stopwords = read_word_set(paths.stopwords);
  r.abbreviations = read_word_set(paths.abbreviations);
  for (const auto& row : read_tsv(paths.part_whole_cues, 2)) {
    if (row[0] == "WHOLE") r.whole_cues.insert(to_lower(row[1]));
    else if (row[0] == "PART") r.part_cues.insert(to_lower(row[1]));
    else throw ParseError("unknown cue kind '" + row[0] + "' in " + paths.part_whole_cues.string());
  }
  for (const auto& row : read_tsv(paths.verbs, 2)) {
    std::string lemma = to_lower(row[0]);
    std::string form;
    for (char c : row[1] + " ") {
      if (c == ' ') {
        if (!form.empty()) r.verb_forms.emplace(to_lower(form), lemma);
        form.clear();
      } else {
        form += c;
      }
    }
  }
  r.math_terms = MathTermLexicon::load(paths.math_terms);
  std::unordered_map<std::string, std::string> irregular;
  for (const auto& row : read_tsv(paths.irregular_plurals, 2)) irregular.emplace(to_lower(row[0]), to_lower(row[1]));
  r.singularize = Singularizer(std::move(irregular));
  return r;
}

std::string ExtractionRules::lemma(std::string_view lower) const {
  if (auto it = verb_forms.find(std::string(lower)); it != verb_forms.end()) return it->second;
  return std::string(lower);
}

std::vector<Quantity> detect_numbers(const std::vector<Token>& tokens, const ExtractionRules& rules) {
  std::vector<Quantity> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& w = tokens[i].lower;
    if (is_numeral(w)) {
      if (auto value = Rational::parse(w)) out.push_back(make_quantity(out.size(), i, *value));
    } else if (auto it = rules.number_words.find(w); it != rules.number_words.end()) {
      out.push_back(make_quantity(out.size(), i, it->second));
    }
  }
  return out;
}

std::vector<Quantity> detect_numbers(std::string_view text, const ExtractionRules& rules) {
  return detect_numbers(tokenize(text, rules.abbreviations), rules);
}

std::optional<Span> extract_question_unit(const WordProblem& p, const ExtractionRules& rules) {
  const Span& s = p.question;
  for (std::size_t i = s.begin; i + 1 < s.end; ++i) {
    if (p.tokens[i].lower != "how") continue;
    const auto& next = p.tokens[i + 1].lower;
    if (next != "many" && next != "much") continue;
    std::size_t start = skip_filler(p, i + 2, s.end);
    Span run = noun_run(p, start, s.end, rules);
    if (!run.empty()) return run;
  }
  return std::nullopt;
}

QuantitySchema extract_schema(const WordProblem& p, const Quantity& q, const ExtractionRules& rules) {
  QuantitySchema schema;
  const Span s = p.sentence_of(q.tokens.begin);

  schema.verb = find_verb(p, q, s, rules);
  schema.subject = find_subject(p, q, schema.verb, s, rules);
  schema.indirect_object = find_indirect_object(p, q, schema.verb, s, rules);

  // "$" before the number is its unit.
  if (q.tokens.begin > s.begin && p.tokens[q.tokens.begin - 1].lower == "$") {
    schema.unit = Span{q.tokens.begin - 1, q.tokens.begin};
  } else {
    Span run = noun_run(p, skip_filler(p, q.tokens.end, s.end), s.end, rules);
    if (!run.empty()) schema.unit = run;
    else if (p.question_unit) schema.unit = p.question_unit;
  }
  schema.rate = find_rate(p, q, schema.unit, s, rules);
  schema.math_term = find_math_term(p, q, s, rules);

  schema.neighborhood = neighborhood_words(p, q, rules.window);
  return schema;
}

std::vector<std::string> neighborhood_words(const WordProblem& p, const Quantity& q, std::size_t window) {
  const Span s = p.sentence_of(q.tokens.begin);
  std::size_t lo = q.tokens.begin >= s.begin + window ? q.tokens.begin - window : s.begin;
  std::size_t hi = std::min(s.end, q.tokens.end + window);
  std::vector<std::string> out;
  for (std::size_t i = lo; i < hi; ++i)
    if (!q.tokens.contains(i) && is_word(p.tokens[i].lower)) out.push_back(p.tokens[i].lower);
  return out;
}

WordProblem build_problem(std::string id, std::string text, const ExtractionRules& rules) {
  WordProblem p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.tokens = tokenize(p.text, rules.abbreviations);
  p.sentences = split_sentences(p.tokens);
  p.question = p.sentences.empty() ? Span{} : p.sentences.back();
  for (auto it = p.sentences.rbegin(); it != p.sentences.rend(); ++it) {
    if (p.tokens[it->end - 1].surface == "?") {
      p.question = *it;
      break;
    }
  }
  p.quantities = detect_numbers(p.tokens, rules);
  p.question_unit = extract_question_unit(p, rules);
  for (auto& q : p.quantities) q.schema = extract_schema(p, q, rules);
  return p;
}

std::vector<std::string> normalized_words(const WordProblem& p, const Span& span, const ExtractionRules& r) {
  std::vector<std::string> out;
  for (std::size_t i = span.begin; i < span.end && i < p.tokens.size(); ++i) {
    const auto& w = p.tokens[i].lower;
    if (w == "'s" || (r.determiners.contains(w) && !r.pronouns.contains(w))) continue;
    if (w == "$") {
      out.push_back("dollar");
    } else {
      out.push_back(r.singularize(w));
    }
  }
  return out;
}

std::string head_noun(const WordProblem& p, const Span& span, const ExtractionRules& r) {
  auto words = normalized_words(p, span, r);
  return words.empty() ? std::string() : words.back();
}

std::set<std::size_t> filter_irrelevant(const WordProblem& p, const ExtractionRules& rules) {
  const std::size_t n = p.quantities.size();
  std::vector<std::string> unit(n), rate(n);
  for (const auto& q : p.quantities) {
    if (q.schema.unit) unit[q.index] = head_noun(p, *q.schema.unit, rules);
    if (q.schema.rate) rate[q.index] = head_noun(p, *q.schema.rate, rules);
  }
  std::string asked = p.question_unit ? head_noun(p, *p.question_unit, rules) : std::string();
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (unit[i].empty()) continue;
    bool matched = unit[i] == asked;
    for (std::size_t j = 0; j < n && !matched; ++j) {
      if (j == i) continue;
      matched = unit[i] == unit[j] || unit[i] == rate[j] || (!rate[i].empty() && rate[i] == unit[j]);
    }
    if (!matched) out.insert(i);
  }
  // Filtering everything would leave nothing to solve; keep all instead.
  if (out.size() == n) out.clear();
  return out;
}

}  // namespace wps
