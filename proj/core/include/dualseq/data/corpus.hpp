#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualseq/data/vocab.hpp"
#include "dualseq/errors.hpp"
#include "dualseq/rng.hpp"

namespace dualseq::data {

struct Bucket {
  std::size_t enc_len;
  std::size_t dec_len;
  friend bool operator==(const Bucket&, const Bucket&) = default;
};

struct BucketSpec {
  std::vector<Bucket> buckets{{10, 10}, {20, 20}};

  /// Throws ContractError unless non-empty and strictly increasing in both lengths.
  void validate() const;
  /// "10:10,20:20"
  static BucketSpec parse(const std::string& text);
  std::string to_string() const;
  const Bucket& largest() const { return buckets.back(); }
};

/// Smallest bucket holding the source, the ASR variant (when present) and
/// the target plus its EOS marker; nullopt when no bucket fits all of them.
std::optional<std::size_t> bucketize(std::size_t src_len, std::size_t tgt_len, std::optional<std::size_t> asr_len,
                                     const BucketSpec& spec);

struct DialogExample {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;  // ends with EOS
  std::optional<std::vector<TokenId>> asr;
  std::size_t bucket = 0;
};

struct LoadSummary {
  std::vector<std::size_t> per_bucket;
  std::size_t rejected = 0;
  std::size_t total = 0;

  std::string to_string(const BucketSpec& spec) const;
};

struct ParallelCorpus {
  std::vector<DialogExample> examples;
  LoadSummary summary;
};

struct CorpusPaths {
  std::filesystem::path enc;
  std::filesystem::path dec;
  std::optional<std::filesystem::path> asr;
};

using TokenLines = std::vector<std::vector<std::string>>;

/// One entry per LF-terminated line (a final unterminated line counts; a
/// trailing CR is dropped). Throws DataError when the file cannot be read.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes one line per entry via a temporary file and rename.
void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);

/// read_lines + preprocess + tokenize.
TokenLines read_token_lines(const std::filesystem::path& path);

/// Encodes and bucketizes line-aligned token lines. Examples with an empty
/// source (or ASR variant) or that fit no bucket are dropped and counted.
ParallelCorpus build_corpus(const TokenLines& enc, const TokenLines& dec, const TokenLines* asr, const Vocab& vocab,
                            const BucketSpec& spec);

/// Loads the .enc/.dec(/_asr.enc) file set. Throws DataError for a missing
/// file or a line-count mismatch ("line count mismatch 3 vs 2").
ParallelCorpus load_parallel_corpus(const CorpusPaths& paths, const Vocab& vocab, const BucketSpec& spec);

/// Seeded shuffle, then the first floor(pct/100 * n) items. For one seed the
/// subsets are nested: a smaller pct yields a prefix of a larger one.
template <typename T>
std::vector<T> subset_percentage(std::span<const T> items, double pct, std::uint64_t seed) {
  if (!(pct > 0.0 && pct <= 100.0)) throw ContractError("subset_percentage: pct must be in (0, 100]");
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed, {0x5b5e7ULL});
  rng.shuffle(std::span(order));
  const auto n = static_cast<std::size_t>(pct * static_cast<double>(items.size()) / 100.0);
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(items[order[i]]);
  return out;
}

}  // namespace dualseq::data
