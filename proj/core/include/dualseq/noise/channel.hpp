#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dualseq/rng.hpp"

namespace dualseq::noise {

using Tokens = std::vector<std::string>;

/// Rates of the synthetic ASR channel. The defaults are calibration values
/// chosen so the channel's sentence-BLEU histogram lands near the target
/// distribution on dialog-style text; they are not measured ASR error rates.
struct NoiseConfig {
  bool strip_punctuation = true;
  double homophone_rate = 0.35;   // per lexicon match
  double substitute_rate = 0.13;  // per token
  double delete_rate = 0.06;      // per token
  double insert_rate = 0.04;      // after each surviving token
  std::filesystem::path lexicon_path;
  std::uint64_t seed = 1;

  /// Rates in [0, 1] and delete + substitute <= 1.
  void validate() const;
};

/// Phrase -> confusable phrases. Keys and replacements are token sequences
/// in preprocessed (lowercase) form.
class HomophoneLexicon {
 public:
  /// Lines `source<TAB>repl_1|repl_2|...`; blank lines and lines starting
  /// with '#' are skipped. Errors throw DataError naming `origin` and the line.
  static HomophoneLexicon parse(std::istream& in, const std::string& origin = "<lexicon>");
  static HomophoneLexicon load(const std::filesystem::path& path);

  /// Throws ContractError if a replacement equals the source or the phrase is
  /// not in preprocessed form.
  void add(const std::string& source, const std::vector<std::string>& replacements);

  std::size_t size() const { return entries_.size(); }
  std::size_t longest() const { return longest_; }
  /// Replacements for the phrase tokens[pos, pos+len), or nullptr.
  const std::vector<Tokens>* find(std::span<const std::string> phrase) const;

 private:
  std::map<Tokens, std::vector<Tokens>> entries_;
  std::size_t longest_ = 0;
};

/// Drops tokens made only of punctuation characters.
Tokens strip_punct(std::span<const std::string> tokens);

/// Left to right, the longest lexicon phrase starting at each position is
/// replaced with probability `rate` by a uniformly chosen confusable. A
/// matched phrase is consumed whether or not it was replaced, so matches
/// never overlap.
Tokens apply_homophones(std::span<const std::string> tokens, const HomophoneLexicon& lexicon, double rate, Rng& rng);

struct WordNoise {
  double substitute_rate = 0.0;
  double delete_rate = 0.0;
  double insert_rate = 0.0;
};

/// Per token one draw decides delete, substitute (with a different word from
/// `pool`) or keep; after every token that is not deleted a pool word is
/// inserted with insert_rate. If every token is deleted the last input token
/// is kept, so non-empty input never yields empty output.
Tokens apply_word_noise(std::span<const std::string> tokens, const WordNoise& rates, std::span<const std::string> pool,
                        Rng& rng);

/// The `n` most frequent non-punctuation tokens, ties lexicographic.
Tokens frequent_words(std::span<const Tokens> lines, std::size_t n = 1000);

/// Sentence-BLEU histogram over [0, 0.4), [0.4, 0.7), [0.7, 1.0].
struct NoiseBinReport {
  std::array<std::size_t, 3> bins{};
  std::size_t total = 0;

  static std::size_t bin_of(double bleu);
  void add(double bleu);
  NoiseBinReport& operator+=(const NoiseBinReport& other);
  double proportion(std::size_t bin) const;
  std::string to_string() const;
};

/// Sentence BLEU of `noisy` against the punctuation-stripped `clean`. An
/// empty stripped reference scores 1 against an empty candidate, else 0.
double channel_bleu(std::span<const std::string> clean, std::span<const std::string> noisy);

/// Throws ContractError when the lists differ in length.
NoiseBinReport bin_report(std::span<const Tokens> clean, std::span<const Tokens> noisy);

struct SynthesisResult {
  std::vector<Tokens> noisy;
  NoiseBinReport report;
};

/// strip_punct -> apply_homophones -> apply_word_noise on every line, line k
/// drawing from its own stream (seed, k). The substitution pool is the clean
/// corpus's 1000 most frequent words. Throws ContractError on an empty corpus.
SynthesisResult synthesize_asr_corpus(std::span<const Tokens> clean, const NoiseConfig& config,
                                      const HomophoneLexicon& lexicon);

}  // namespace dualseq::noise
