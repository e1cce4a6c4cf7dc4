#pragma once

#include <random>
#include <utility>
#include <vector>

namespace wps {

/// Fisher-Yates driven by raw mt19937_64 draws, so the permutation is the
/// same on every standard library (std::shuffle is not).
template <class T>
void stable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace wps
