#include "dualseq/eval/synthetic_corpus.hpp"

#include <string>
#include <vector>

#include "dualseq/data/corpus.hpp"
#include "dualseq/data/synthetic.hpp"
#include "dualseq/data/text.hpp"
#include "dualseq/errors.hpp"

namespace dualseq::eval {

namespace {

noise::NoiseBinReport write_split(const std::filesystem::path& dir, const std::string& split,
                                  std::span<const data::DialogPair> pairs, const noise::NoiseConfig& config,
                                  const noise::HomophoneLexicon& lexicon) {
  std::vector<std::string> enc, dec, asr;
  std::vector<noise::Tokens> clean;
  for (const auto& p : pairs) {
    enc.push_back(p.prompt);
    dec.push_back(p.response);
    clean.push_back(data::tokenize(data::preprocess(p.prompt)));
  }
  auto synth = noise::synthesize_asr_corpus(clean, config, lexicon);
  for (const auto& t : synth.noisy) asr.push_back(data::join_tokens(t));
  data::write_lines(dir / (split + ".enc"), enc);
  data::write_lines(dir / (split + ".dec"), dec);
  data::write_lines(dir / (split + "_asr.enc"), asr);
  return synth.report;
}

}  // namespace

SyntheticCorpusStats write_synthetic_corpus(const std::filesystem::path& dir, std::size_t train_pairs,
                                            std::size_t test_pairs, std::uint64_t seed,
                                            const noise::NoiseConfig& noise, const noise::HomophoneLexicon& lexicon) {
  if (train_pairs == 0 || test_pairs == 0) throw ContractError("synthetic corpus needs train and test pairs");
  std::filesystem::create_directories(dir);
  const auto pairs = data::generate_dialogs(train_pairs + test_pairs, seed);
  const std::span<const data::DialogPair> all(pairs);
  noise::NoiseConfig test_noise = noise;
  test_noise.seed = noise.seed ^ 0x7e57ULL;
  SyntheticCorpusStats stats;
  stats.train = write_split(dir, "train", all.first(train_pairs), noise, lexicon);
  stats.test = write_split(dir, "test", all.subspan(train_pairs), test_noise, lexicon);
  return stats;
}

}  // namespace dualseq::eval
