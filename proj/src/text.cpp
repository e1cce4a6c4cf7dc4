#include "wps/text.hpp"

#include <cctype>
#include <fstream>

#include "wps/errors.hpp"

namespace wps {

namespace {

bool alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && space(s[b])) ++b;
  while (e > b && space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Length of the numeral starting at i: digits with interior "," or "." groups.
std::size_t numeral_length(std::string_view text, std::size_t i) {
  std::size_t j = i;
  while (j < text.size()) {
    if (digit(text[j])) {
      ++j;
    } else if ((text[j] == ',' || text[j] == '.') && j + 1 < text.size() && digit(text[j + 1]) && j > i) {
      ++j;
    } else {
      break;
    }
  }
  return j - i;
}

std::size_t word_length(std::string_view text, std::size_t i) {
  std::size_t j = i;
  while (j < text.size()) {
    char c = text[j];
    if (alpha(c) || digit(c)) {
      ++j;
    } else if ((c == '-' || c == '\'') && j + 1 < text.size() && alpha(text[j + 1])) {
      // "'s" is split off as a clitic; other apostrophes stay inside the word.
      if (c == '\'' && (text[j + 1] == 's' || text[j + 1] == 'S') &&
          (j + 2 >= text.size() || !alpha(text[j + 2])))
        break;
      ++j;
    } else {
      break;
    }
  }
  return j - i;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<Token> tokenize(std::string_view text, const WordSet& abbreviations) {
  std::vector<Token> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    Token t;
    t.surface = std::string(text.substr(b, e - b));
    t.lower = to_lower(t.surface);
    t.char_begin = b;
    t.char_end = e;
    out.push_back(std::move(t));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (space(c)) {
      ++i;
    } else if (digit(c)) {
      std::size_t n = numeral_length(text, i);
      emit(i, i + n);
      i += n;
    } else if (alpha(c)) {
      std::size_t n = word_length(text, i);
      if (i + n < text.size() && text[i + n] == '.' &&
          abbreviations.contains(to_lower(text.substr(i, n + 1)))) {
        ++n;
      }
      emit(i, i + n);
      i += n;
    } else if (c == '\'' && i + 1 < text.size() && (text[i + 1] == 's' || text[i + 1] == 'S') &&
               (i + 2 >= text.size() || !alpha(text[i + 2]))) {
      emit(i, i + 2);
      i += 2;
    } else {
      emit(i, i + 1);
      ++i;
    }
  }
  return out;
}

bool is_sentence_end(std::string_view s) { return s == "." || s == "?" || s == "!"; }

std::vector<Span> split_sentences(const std::vector<Token>& tokens) {
  std::vector<Span> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_sentence_end(tokens[i].surface)) {
      // Runs like "?!" stay with the sentence they close.
      while (i + 1 < tokens.size() && is_sentence_end(tokens[i + 1].surface)) ++i;
      out.push_back({begin, i + 1});
      begin = i + 1;
    }
  }
  if (begin < tokens.size()) out.push_back({begin, tokens.size()});
  return out;
}

bool is_numeral(std::string_view s) { return !s.empty() && digit(s.front()) && numeral_length(s, 0) == s.size(); }

bool is_word(std::string_view s) {
  if (s.empty() || !alpha(s.front())) return false;
  for (char c : s)
    if (!alpha(c) && c != '-' && c != '\'') return false;
  return true;
}

std::string Singularizer::operator()(std::string_view word) const {
  std::string w = to_lower(word);
  if (auto it = irregular_.find(w); it != irregular_.end()) return it->second;
  if (w.size() > 2 && w.back() == 's' && !w.ends_with("ss") && !w.ends_with("us")) w.pop_back();
  return w;
}

std::vector<std::string> read_entries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path, std::size_t min_columns) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  std::vector<std::vector<std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> row;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = t.find('\t', start);
      row.push_back(trim(std::string_view(t).substr(start, tab - start)));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (row.size() < min_columns)
      throw ParseError(path.filename().string() + ": expected " + std::to_string(min_columns) + " columns", line_no);
    out.push_back(std::move(row));
  }
  return out;
}

WordSet read_word_set(const std::filesystem::path& path) {
  WordSet out;
  for (auto& e : read_entries(path)) out.insert(to_lower(e));
  return out;
}

}  // namespace wps
