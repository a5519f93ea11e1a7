#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace dualseq::testing_support {

using Tokens = std::vector<std::string>;

inline bool same_ngram(const Tokens& a, std::size_t i, const Tokens& b, std::size_t j, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k)
    if (a[i + k] != b[j + k]) return false;
  return true;
}

inline std::size_t occurrences(const Tokens& hay, const Tokens& needle, std::size_t at, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t j = 0; j + n <= hay.size(); ++j) c += same_ngram(hay, j, needle, at, n);
  return c;
}

// Clipped n-gram matches by rescanning both sides for every candidate
// position; a repeated n-gram is counted once, at its first position.
inline std::pair<double, double> brute_counts(const Tokens& cand, const Tokens& ref, std::size_t n) {
  if (cand.size() < n) return {0, 0};
  double matched = 0;
  for (std::size_t i = 0; i + n <= cand.size(); ++i) {
    bool first = true;
    for (std::size_t p = 0; p < i; ++p) first = first && !same_ngram(cand, p, cand, i, n);
    if (!first) continue;
    matched += static_cast<double>(std::min(occurrences(cand, cand, i, n), occurrences(ref, cand, i, n)));
  }
  return {matched, static_cast<double>(cand.size() - n + 1)};
}

inline double brute_bleu(const Tokens& cand, const Tokens& ref) {
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto [m, t] = brute_counts(cand, ref, n);
    if (n == 1 && m == 0) return 0.0;
    const double p = m > 0 ? m / t : 1.0 / (t + 1.0);
    log_sum += std::log(p) / 4.0;
  }
  const double c = static_cast<double>(cand.size()), r = static_cast<double>(ref.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum);
}

}  // namespace dualseq::testing_support
