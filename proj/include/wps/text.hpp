#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "wps/problem.hpp"

namespace wps {

using WordSet = std::unordered_set<std::string>;

std::string to_lower(std::string_view s);

/// Words, numbers ("3.5", "1,000"), punctuation and the clitic "'s" become
/// separate tokens. Abbreviations listed with their period ("mrs.") stay whole.
std::vector<Token> tokenize(std::string_view text, const WordSet& abbreviations);

/// Sentences end after ".", "?" or "!". Trailing text without a terminator
/// forms a final sentence. Never returns empty spans.
std::vector<Span> split_sentences(const std::vector<Token>& tokens);

bool is_numeral(std::string_view s);
/// Starts with a letter and contains only letters, hyphens and apostrophes.
bool is_word(std::string_view s);
bool is_sentence_end(std::string_view s);

/// Lowercase singular form: irregular table first, then a trailing "s" is
/// dropped unless the word ends in "ss" or "us".
class Singularizer {
 public:
  Singularizer() = default;
  explicit Singularizer(std::unordered_map<std::string, std::string> irregular)
      : irregular_(std::move(irregular)) {}

  std::string operator()(std::string_view word) const;

 private:
  std::unordered_map<std::string, std::string> irregular_;
};

/// Non-empty, non-comment ("#") lines with surrounding whitespace removed.
/// Throws ParseError when the file cannot be read.
std::vector<std::string> read_entries(const std::filesystem::path& path);
/// Tab-separated entries; every row must have at least `min_columns` fields.
std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& path, std::size_t min_columns);
/// Lowercased one-word-per-line list.
WordSet read_word_set(const std::filesystem::path& path);

}  // namespace wps
