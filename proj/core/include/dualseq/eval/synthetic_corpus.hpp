#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "dualseq/noise/channel.hpp"

namespace dualseq::eval {

struct SyntheticCorpusStats {
  noise::NoiseBinReport train;
  noise::NoiseBinReport test;
};

/// Writes the six corpus files to `dir`: generated dialog prompts and
/// responses as raw text, and ASR variants of the prompts from the noise
/// channel. Train and test pairs come from disjoint generator indices.
SyntheticCorpusStats write_synthetic_corpus(const std::filesystem::path& dir, std::size_t train_pairs,
                                            std::size_t test_pairs, std::uint64_t seed,
                                            const noise::NoiseConfig& noise, const noise::HomophoneLexicon& lexicon);

}  // namespace dualseq::eval
