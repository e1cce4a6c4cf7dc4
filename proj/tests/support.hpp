#pragma once

// Shared fixtures: bundled resources, corpora and a random problem generator.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wps/corpus.hpp"
#include "wps/extraction.hpp"
#include "wps/inference.hpp"
#include "wps/resources.hpp"

namespace wps::testing {

inline const Resources& resources() {
  static const Resources res = load_resources(default_data_dir());
  return res;
}

inline std::filesystem::path corpus_path(const std::string& name) { return default_data_dir() / "corpus" / name; }

inline const std::vector<WordProblem>& mini_train() {
  static const auto c = load_corpus(corpus_path("mini_train.jsonl"), resources());
  return c;
}

inline const std::vector<WordProblem>& mini_heldout() {
  static const auto c = load_corpus(corpus_path("mini_heldout.jsonl"), resources());
  return c;
}

inline WordProblem problem(const std::string& text, const std::string& id = "p") {
  return build_problem(id, text, resources().rules);
}

inline const WordProblem& find_problem(const std::vector<WordProblem>& corpus, const std::string& id) {
  for (const auto& p : corpus)
    if (p.id == id) return p;
  throw std::out_of_range("no problem " + id);
}

/// Short story built from transfer, rate and comparison sentences with
/// random names, verbs, units and values. Every sentence carries one number.
inline std::string random_story(std::mt19937_64& rng, std::size_t sentences) {
  static const std::vector<std::string> names{"Adam", "Sara", "Tom", "Lily", "Ben", "Nina", "Omar", "Jill"};
  static const std::vector<std::string> units{"marbles", "apples", "cards", "coins", "stickers", "books"};
  static const std::vector<std::string> containers{"box", "bag", "jar", "basket"};
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& { return v[rng() % v.size()]; };
  auto num = [&] { return std::to_string(2 + rng() % 60); };
  const std::string unit = pick(units);
  const std::string hero = pick(names);
  std::string text;
  for (std::size_t i = 0; i < sentences; ++i) {
    std::string other = pick(names);
    switch (rng() % 9) {
      case 0: text += hero + " has " + num() + " " + unit + ". "; break;
      case 1: text += hero + " gave " + num() + " " + unit + " to " + other + ". "; break;
      case 2: text += other + " gave " + hero + " " + num() + " " + unit + ". "; break;
      case 3: text += other + " bought " + num() + " " + unit + ". "; break;
      case 4: text += "Each " + pick(containers) + " has " + num() + " " + unit + ". "; break;
      case 5: text += other + " has " + num() + " more " + unit + " than " + hero + ". "; break;
      case 6: text += hero + " has " + num() + " times as many " + unit + " as " + other + ". "; break;
      case 7: text += other + " lost " + num() + " " + unit + ". "; break;
      default: text += hero + " filled " + num() + " " + pick(containers) + "s. "; break;
    }
  }
  text += "How many " + unit + " does " + hero + " have?";
  return text;
}

/// Uniform weights in [-1, 1] for every feature the problem can fire.
inline Model random_model(const CandidateTable& table, std::mt19937_64& rng) {
  Model m;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = table.problem().quantities.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (const auto& c : table.at(i, j)) {
        for (const auto& [f, v] : c.r.entries())
          if (!m.w_r.contains(f)) m.w_r[f] = u(rng);
        for (const auto& [f, v] : c.k.entries())
          if (!m.w_k.contains(f)) m.w_k[f] = u(rng);
      }
  return m;
}

}  // namespace wps::testing
