#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dualseq::data {

/// One raw single-turn exchange (mixed case, digits and punctuation intact).
struct DialogPair {
  std::string prompt;
  std::string response;
};

/// Template-driven English small talk: a few dozen intents, each with several
/// prompt phrasings and a skewed set of responses that reuse the prompt's slot
/// values (names, places, foods, days, ...). Deterministic in (n, seed).
std::vector<DialogPair> generate_dialogs(std::size_t n, std::uint64_t seed);

}  // namespace dualseq::data
