#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualseq/autodiff/graph.hpp"

namespace dualseq::data {

using ad::TokenId;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kGo = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kReservedTokens = 4;

/// Token <-> id map. Ids 0..3 are PAD, GO, EOS, UNK; the rest are ordered by
/// descending corpus frequency, ties broken lexicographically.
class Vocab {
 public:
  /// Counts every token of `lines` and keeps the (max_size - 4) most frequent.
  /// Throws ContractError on an empty corpus or max_size < 4.
  static Vocab build(std::span<const std::vector<std::string>> lines, std::size_t max_size);

  /// Tokens in id order; the first four must be the reserved markers.
  static Vocab from_tokens(std::vector<std::string> tokens);

  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }

  /// UNK for out-of-vocabulary tokens.
  TokenId id_of(const std::string& token) const;
  std::optional<TokenId> find(const std::string& token) const;
  const std::string& token_of(TokenId id) const;

  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  /// Stops at the first EOS; PAD and GO are dropped.
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  /// Non-reserved tokens, most frequent first.
  std::span<const std::string> ranked() const { return std::span(tokens_).subspan(kReservedTokens); }

  /// FNV-1a over the newline-joined token list; stored in checkpoints.
  std::uint64_t hash() const;

  std::span<const std::string> tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

const std::vector<std::string>& reserved_token_names();

}  // namespace dualseq::data
