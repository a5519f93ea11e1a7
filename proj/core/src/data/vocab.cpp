#include "dualseq/data/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "dualseq/data/corpus.hpp"
#include "dualseq/errors.hpp"

namespace dualseq::data {

const std::vector<std::string>& reserved_token_names() {
  static const std::vector<std::string> names{"<pad>", "<go>", "<eos>", "<unk>"};
  return names;
}

Vocab Vocab::build(std::span<const std::vector<std::string>> lines, std::size_t max_size) {
  if (lines.empty()) throw ContractError("build_vocab: empty corpus");
  if (max_size < kReservedTokens) throw ContractError(fmt::format("build_vocab: max_size {} < 4", max_size));

  std::map<std::string, std::size_t> counts;
  for (const auto& line : lines)
    for (const auto& t : line) ++counts[t];
  for (const auto& r : reserved_token_names()) counts.erase(r);

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> tokens = reserved_token_names();
  const std::size_t keep = std::min(ranked.size(), max_size - kReservedTokens);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(std::move(ranked[i].first));
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  const auto& reserved = reserved_token_names();
  if (tokens.size() < kReservedTokens || !std::equal(reserved.begin(), reserved.end(), tokens.begin())) {
    throw DataError("vocabulary must start with <pad> <go> <eos> <unk>");
  }
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.ids_.emplace(v.tokens_[i], static_cast<TokenId>(i)).second) {
      throw DataError(fmt::format("duplicate vocabulary token '{}'", v.tokens_[i]));
    }
  }
  return v;
}

Vocab Vocab::load(const std::filesystem::path& path) { return from_tokens(read_lines(path)); }

void Vocab::save(const std::filesystem::path& path) const { write_lines(path, tokens_); }

TokenId Vocab::id_of(const std::string& token) const { return find(token).value_or(kUnk); }

std::optional<TokenId> Vocab::find(const std::string& token) const {
  if (auto it = ids_.find(token); it != ids_.end()) return it->second;
  return std::nullopt;
}

const std::string& Vocab::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError(fmt::format("token id {} outside vocabulary of size {}", id, tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocab::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_of(t));
  return ids;
}

std::vector<std::string> Vocab::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  for (auto id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kGo) continue;
    out.push_back(token_of(id));
  }
  return out;
}

std::uint64_t Vocab::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& t : tokens_) {
    for (char c : t) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

}  // namespace dualseq::data
