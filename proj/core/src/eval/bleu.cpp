#include "dualseq/eval/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dualseq/errors.hpp"

namespace dualseq::eval {

namespace {

using Gram = std::span<const std::string>;

struct GramLess {
  bool operator()(Gram a, Gram b) const { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); }
};

std::map<Gram, std::size_t, GramLess> count_grams(std::span<const std::string> tokens, std::size_t n) {
  std::map<Gram, std::size_t, GramLess> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[tokens.subspan(i, n)];
  return counts;
}

}  // namespace

void BleuParams::validate() const {
  if (max_n == 0) throw ContractError("BLEU max_n must be >= 1");
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.matches.size() != matches.size()) throw ContractError("BLEU statistics of different orders");
  for (std::size_t i = 0; i < matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  candidate_len += other.candidate_len;
  reference_len += other.reference_len;
  return *this;
}

BleuStats bleu_stats(std::span<const std::string> candidate, std::span<const std::string> reference,
                     std::size_t max_n) {
  BleuStats s(max_n);
  s.candidate_len = candidate.size();
  s.reference_len = reference.size();
  for (std::size_t n = 1; n <= max_n; ++n) {
    if (candidate.size() < n) break;
    const auto ref = count_grams(reference, n);
    for (const auto& [gram, count] : count_grams(candidate, n)) {
      auto it = ref.find(gram);
      if (it != ref.end()) s.matches[n - 1] += std::min(count, it->second);
    }
    s.totals[n - 1] = candidate.size() - n + 1;
  }
  return s;
}

double bleu_score(const BleuStats& s, const BleuParams& params) {
  params.validate();
  if (s.matches.size() < params.max_n) throw ContractError("BLEU statistics have fewer orders than max_n");
  if (s.candidate_len == 0 || s.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= params.max_n; ++n) {
    const double m = static_cast<double>(s.matches[n - 1]);
    const double t = static_cast<double>(s.totals[n - 1]);
    double p;
    if (s.matches[n - 1] > 0) {
      p = m / t;
    } else if (params.smoothing) {
      p = 1.0 / (t + 1.0);
    } else {
      return 0.0;
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(s.candidate_len);
  const double r = static_cast<double>(s.reference_len);
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(params.max_n));
}

double bleu_sentence(std::span<const std::string> candidate, std::span<const std::string> reference,
                     const BleuParams& params) {
  if (reference.empty()) throw ContractError("BLEU reference is empty");
  return bleu_score(bleu_stats(candidate, reference, params.max_n), params);
}

double bleu_corpus(std::span<const std::pair<Tokens, Tokens>> pairs, const BleuParams& params) {
  if (pairs.empty()) throw ContractError("BLEU corpus is empty");
  BleuStats total(params.max_n);
  for (const auto& [cand, ref] : pairs) {
    if (ref.empty()) throw ContractError("BLEU reference is empty");
    total += bleu_stats(cand, ref, params.max_n);
  }
  return bleu_score(total, params);
}

double bleu_sentence_mean(std::span<const std::pair<Tokens, Tokens>> pairs, const BleuParams& params) {
  if (pairs.empty()) throw ContractError("BLEU corpus is empty");
  double sum = 0.0;
  for (const auto& [cand, ref] : pairs) sum += bleu_sentence(cand, ref, params);
  return sum / static_cast<double>(pairs.size());
}

}  // namespace dualseq::eval
