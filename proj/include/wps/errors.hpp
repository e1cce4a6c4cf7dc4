#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wps {

/// A divisor evaluated to zero.
class DivisionByZero : public std::domain_error {
 public:
  DivisionByZero() : std::domain_error("division by zero") {}
};

/// No chain of applicable rules combines the problem's quantities.
class NoDerivation : public std::runtime_error {
 public:
  explicit NoDerivation(const std::string& problem_id)
      : std::runtime_error("no derivation for problem '" + problem_id + "'") {}
};

class UnknownRule : public std::invalid_argument {
 public:
  explicit UnknownRule(const std::string& id)
      : std::invalid_argument("unknown rule id '" + id + "'") {}
};

/// Gold nodes that no rule of the annotated concept can explain.
class ReachabilityError : public std::runtime_error {
 public:
  explicit ReachabilityError(std::vector<std::string> nodes);
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<std::string> nodes_;
};

/// A multiplication/division node with neither a rate nor a math term.
class AnnotationGap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidK : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class LengthMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed corpus, model, lexicon or expression text. `line` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace wps
