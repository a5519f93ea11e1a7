#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dualseq::eval {

using Tokens = std::vector<std::string>;

struct BleuParams {
  std::size_t max_n = 4;
  /// For n >= 2, a zero match count becomes precision 1 / (candidate n-grams + 1).
  bool smoothing = true;

  void validate() const;
};

/// Clipped n-gram matches and candidate n-gram totals per order, plus lengths.
/// Statistics from several sentences add up to corpus statistics.
struct BleuStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t candidate_len = 0;
  std::size_t reference_len = 0;

  explicit BleuStats(std::size_t max_n = 4) : matches(max_n, 0), totals(max_n, 0) {}
  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(std::span<const std::string> candidate, std::span<const std::string> reference,
                     std::size_t max_n = 4);

/// Geometric mean of the (smoothed) precisions times the brevity penalty
/// exp(1 - r/c) for c < r. Zero when the candidate is empty or no unigram matches.
double bleu_score(const BleuStats& stats, const BleuParams& params = {});

/// Throws ContractError on an empty reference.
double bleu_sentence(std::span<const std::string> candidate, std::span<const std::string> reference,
                     const BleuParams& params = {});

/// Pooled statistics over all pairs, then one score. Throws ContractError on
/// an empty list or an empty reference.
double bleu_corpus(std::span<const std::pair<Tokens, Tokens>> pairs, const BleuParams& params = {});

/// Mean of sentence scores, for comparison with the pooled score.
double bleu_sentence_mean(std::span<const std::pair<Tokens, Tokens>> pairs, const BleuParams& params = {});

}  // namespace dualseq::eval
