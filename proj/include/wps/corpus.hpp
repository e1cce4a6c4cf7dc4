#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wps/knowledge.hpp"
#include "wps/problem.hpp"

namespace wps {

/// One problem per line, as a JSON object:
///   id        string, required
///   text      string, required
///   numbers   optional list of values; detected numbers are matched to it in
///             order and unmatched detections are dropped
///   solution  optional infix expression, "(16[1]+14[2])/5[3]" (1-based subscripts;
///             leaf values optional but checked when present)
///   rates     optional list of 1-based quantity indices annotated as rates
///   concepts  optional list of concept names, one per internal node of the
///             solution in post-order
///   schemas   optional object mapping 1-based index to field overrides
///             {subject, verb, indirect_object, unit, rate, math_term}; a string
///             is located in the quantity's sentence, null clears the field
///   source    optional provenance id of the problem this one was derived from
/// Blank lines are skipped. Errors throw ParseError with the 1-based line.
WordProblem parse_problem(std::string_view json_line, const Resources& res, std::size_t line_no = 0);
std::vector<WordProblem> read_corpus(std::istream& in, const Resources& res);
std::vector<WordProblem> load_corpus(const std::filesystem::path& path, const Resources& res);

/// Serializes the corpus fields of a problem (schemas are not written).
std::string problem_to_json(const WordProblem& problem);

}  // namespace wps
