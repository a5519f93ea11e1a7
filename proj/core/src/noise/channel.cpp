#include "dualseq/noise/channel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dualseq/data/text.hpp"
#include "dualseq/errors.hpp"
#include "dualseq/eval/bleu.hpp"

namespace dualseq::noise {

namespace {

constexpr std::uint64_t kLineStream = 0xa5e0ULL;

Tokens split_words(const std::string& phrase) {
  Tokens out;
  std::istringstream in(phrase);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

void check_rate(const char* name, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ContractError(fmt::format("noise {} must be in [0, 1], got {}", name, r));
}

}  // namespace

void NoiseConfig::validate() const {
  check_rate("homophone_rate", homophone_rate);
  check_rate("substitute_rate", substitute_rate);
  check_rate("delete_rate", delete_rate);
  check_rate("insert_rate", insert_rate);
  if (substitute_rate + delete_rate > 1.0) throw ContractError("noise delete_rate + substitute_rate must be <= 1");
}

void HomophoneLexicon::add(const std::string& source, const std::vector<std::string>& replacements) {
  Tokens key = split_words(source);
  if (key.empty()) throw ContractError("homophone source phrase is empty");
  if (data::preprocess(source) != data::join_tokens(key)) {
    throw ContractError(fmt::format("homophone source '{}' is not in preprocessed form", source));
  }
  auto& slot = entries_[key];
  for (const auto& r : replacements) {
    Tokens value = split_words(r);
    if (value.empty()) throw ContractError(fmt::format("empty replacement for '{}'", source));
    if (data::preprocess(r) != data::join_tokens(value)) {
      throw ContractError(fmt::format("homophone replacement '{}' is not in preprocessed form", r));
    }
    if (value == key) throw ContractError(fmt::format("homophone '{}' maps to itself", source));
    if (std::find(slot.begin(), slot.end(), value) == slot.end()) slot.push_back(std::move(value));
  }
  longest_ = std::max(longest_, key.size());
}

HomophoneLexicon HomophoneLexicon::parse(std::istream& in, const std::string& origin) {
  HomophoneLexicon lex;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(fmt::format("{}:{}: expected source<TAB>replacements", origin, lineno));
    std::vector<std::string> repl;
    std::istringstream rest(line.substr(tab + 1));
    for (std::string r; std::getline(rest, r, '|');) repl.push_back(r);
    if (repl.empty()) throw DataError(fmt::format("{}:{}: no replacements", origin, lineno));
    try {
      lex.add(line.substr(0, tab), repl);
    } catch (const ContractError& e) {
      throw DataError(fmt::format("{}:{}: {}", origin, lineno, e.what()));
    }
  }
  return lex;
}

HomophoneLexicon HomophoneLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open lexicon {}", path.string()));
  return parse(in, path.string());
}

const std::vector<Tokens>* HomophoneLexicon::find(std::span<const std::string> phrase) const {
  auto it = entries_.find(Tokens(phrase.begin(), phrase.end()));
  return it == entries_.end() ? nullptr : &it->second;
}

Tokens strip_punct(std::span<const std::string> tokens) {
  Tokens out;
  for (const auto& t : tokens) {
    if (!data::is_punct_token(t)) out.push_back(t);
  }
  return out;
}

Tokens apply_homophones(std::span<const std::string> tokens, const HomophoneLexicon& lexicon, double rate, Rng& rng) {
  Tokens out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::vector<Tokens>* match = nullptr;
    std::size_t len = std::min(lexicon.longest(), tokens.size() - i);
    for (; len > 0; --len) {
      if ((match = lexicon.find(tokens.subspan(i, len))) != nullptr) break;
    }
    if (match == nullptr) {
      out.push_back(tokens[i++]);
      continue;
    }
    if (rng.bernoulli(rate)) {
      const Tokens& r = (*match)[match->size() == 1 ? 0 : rng.below(match->size())];
      out.insert(out.end(), r.begin(), r.end());
    } else {
      out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i),
                 tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
    }
    i += len;
  }
  return out;
}

Tokens apply_word_noise(std::span<const std::string> tokens, const WordNoise& rates, std::span<const std::string> pool,
                        Rng& rng) {
  if ((rates.substitute_rate > 0.0 || rates.insert_rate > 0.0) && pool.empty()) {
    throw ContractError("word noise needs a non-empty substitution pool");
  }
  auto draw_other = [&](const std::string& avoid) -> const std::string& {
    if (pool.size() == 1) return pool[0];
    for (;;) {
      const std::string& w = pool[rng.below(pool.size())];
      if (w != avoid) return w;
    }
  };
  Tokens out;
  for (const auto& tok : tokens) {
    const double u = rng.uniform();
    if (u < rates.delete_rate) continue;
    out.push_back(u < rates.delete_rate + rates.substitute_rate ? draw_other(tok) : tok);
    if (rates.insert_rate > 0.0 && rng.bernoulli(rates.insert_rate)) out.push_back(draw_other(""));
  }
  if (out.empty() && !tokens.empty()) out.push_back(tokens.back());
  return out;
}

Tokens frequent_words(std::span<const Tokens> lines, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  for (const auto& line : lines)
    for (const auto& t : line)
      if (!data::is_punct_token(t)) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Tokens out;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) out.push_back(ranked[i].first);
  return out;
}

std::size_t NoiseBinReport::bin_of(double bleu) { return bleu < 0.4 ? 0 : bleu < 0.7 ? 1 : 2; }

void NoiseBinReport::add(double bleu) {
  ++bins[bin_of(bleu)];
  ++total;
}

NoiseBinReport& NoiseBinReport::operator+=(const NoiseBinReport& other) {
  for (std::size_t i = 0; i < bins.size(); ++i) bins[i] += other.bins[i];
  total += other.total;
  return *this;
}

double NoiseBinReport::proportion(std::size_t bin) const {
  return total == 0 ? 0.0 : static_cast<double>(bins.at(bin)) / static_cast<double>(total);
}

std::string NoiseBinReport::to_string() const {
  static constexpr const char* kLabels[] = {"0.0-0.4", "0.4-0.7", "0.7-1.0"};
  std::string s = fmt::format("{:<12}{:>10}{:>9}\n", "BLEU range", "count", "share");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    s += fmt::format("{:<12}{:>10}{:>8.1f}%\n", kLabels[i], bins[i], 100.0 * proportion(i));
  }
  s += fmt::format("{:<12}{:>10}\n", "total", total);
  return s;
}

double channel_bleu(std::span<const std::string> clean, std::span<const std::string> noisy) {
  const Tokens ref = strip_punct(clean);
  if (ref.empty()) return noisy.empty() ? 1.0 : 0.0;
  return eval::bleu_sentence(noisy, ref);
}

NoiseBinReport bin_report(std::span<const Tokens> clean, std::span<const Tokens> noisy) {
  if (clean.size() != noisy.size()) {
    throw ContractError(fmt::format("bin_report: {} clean lines vs {} noisy lines", clean.size(), noisy.size()));
  }
  NoiseBinReport r;
  for (std::size_t i = 0; i < clean.size(); ++i) r.add(channel_bleu(clean[i], noisy[i]));
  return r;
}

SynthesisResult synthesize_asr_corpus(std::span<const Tokens> clean, const NoiseConfig& config,
                                      const HomophoneLexicon& lexicon) {
  config.validate();
  if (clean.empty()) throw ContractError("synthesize: empty corpus");
  const Tokens pool = frequent_words(clean);
  const WordNoise rates{config.substitute_rate, config.delete_rate, config.insert_rate};
  SynthesisResult result;
  result.noisy.reserve(clean.size());
  for (std::size_t k = 0; k < clean.size(); ++k) {
    Rng rng(config.seed, {kLineStream, k});
    Tokens t = config.strip_punctuation ? strip_punct(clean[k]) : clean[k];
    t = apply_homophones(t, lexicon, config.homophone_rate, rng);
    t = apply_word_noise(t, rates, pool, rng);
    result.report.add(channel_bleu(clean[k], t));
    result.noisy.push_back(std::move(t));
  }
  return result;
}

}  // namespace dualseq::noise
