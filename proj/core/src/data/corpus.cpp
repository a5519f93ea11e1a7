#include "dualseq/data/corpus.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dualseq/data/text.hpp"

namespace dualseq::data {

void BucketSpec::validate() const {
  if (buckets.empty()) throw ContractError("bucket spec is empty");
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (buckets[i].enc_len == 0 || buckets[i].dec_len == 0) throw ContractError("bucket lengths must be positive");
    if (i > 0 && (buckets[i].enc_len <= buckets[i - 1].enc_len || buckets[i].dec_len <= buckets[i - 1].dec_len)) {
      throw ContractError("buckets must be strictly increasing in both lengths: " + to_string());
    }
  }
}

BucketSpec BucketSpec::parse(const std::string& text) {
  BucketSpec spec;
  spec.buckets.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DataError("bad bucket '" + item + "', expected enc:dec");
    try {
      spec.buckets.push_back({std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw DataError("bad bucket '" + item + "', expected enc:dec");
    }
  }
  spec.validate();
  return spec;
}

std::string BucketSpec::to_string() const {
  std::string out;
  for (const auto& b : buckets) out += fmt::format("{}{}:{}", out.empty() ? "" : ",", b.enc_len, b.dec_len);
  return out;
}

std::optional<std::size_t> bucketize(std::size_t src_len, std::size_t tgt_len, std::optional<std::size_t> asr_len,
                                     const BucketSpec& spec) {
  const std::size_t enc_need = std::max(src_len, asr_len.value_or(0));
  for (std::size_t i = 0; i < spec.buckets.size(); ++i) {
    if (enc_need <= spec.buckets[i].enc_len && tgt_len + 1 <= spec.buckets[i].dec_len) return i;
  }
  return std::nullopt;
}

std::string LoadSummary::to_string(const BucketSpec& spec) const {
  std::string out = fmt::format("examples {} kept {} rejected {}\n", total, total - rejected, rejected);
  for (std::size_t i = 0; i < per_bucket.size(); ++i) {
    out += fmt::format("bucket ({}, {}) {}\n", spec.buckets[i].enc_len, spec.buckets[i].dec_len, per_bucket[i]);
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw DataError(fmt::format("read error on {}", path.string()));
  return lines;
}

void write_lines(const std::filesystem::path& path, std::span<const std::string> lines) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot open {} for writing", tmp.string()));
    for (const auto& l : lines) out << l << '\n';
    out.flush();
    if (!out) throw DataError(fmt::format("write failed for {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError(fmt::format("cannot move output into {}: {}", path.string(), ec.message()));
}

TokenLines read_token_lines(const std::filesystem::path& path) {
  TokenLines out;
  for (const auto& line : read_lines(path)) out.push_back(tokenize(preprocess(line)));
  return out;
}

ParallelCorpus build_corpus(const TokenLines& enc, const TokenLines& dec, const TokenLines* asr, const Vocab& vocab,
                            const BucketSpec& spec) {
  spec.validate();
  if (enc.size() != dec.size()) throw DataError(fmt::format("line count mismatch {} vs {}", enc.size(), dec.size()));
  if (asr && asr->size() != enc.size()) {
    throw DataError(fmt::format("line count mismatch {} vs {}", enc.size(), asr->size()));
  }
  ParallelCorpus corpus;
  corpus.summary.per_bucket.assign(spec.buckets.size(), 0);
  corpus.summary.total = enc.size();
  for (std::size_t i = 0; i < enc.size(); ++i) {
    const bool empty = enc[i].empty() || (asr && (*asr)[i].empty());
    std::optional<std::size_t> asr_len;
    if (asr) asr_len = (*asr)[i].size();
    auto bucket = empty ? std::nullopt : bucketize(enc[i].size(), dec[i].size(), asr_len, spec);
    if (!bucket) {
      ++corpus.summary.rejected;
      continue;
    }
    DialogExample ex;
    ex.src = vocab.encode(enc[i]);
    ex.tgt = vocab.encode(dec[i]);
    ex.tgt.push_back(kEos);
    if (asr) ex.asr = vocab.encode((*asr)[i]);
    ex.bucket = *bucket;
    ++corpus.summary.per_bucket[*bucket];
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

ParallelCorpus load_parallel_corpus(const CorpusPaths& paths, const Vocab& vocab, const BucketSpec& spec) {
  const auto enc = read_token_lines(paths.enc);
  const auto dec = read_token_lines(paths.dec);
  std::optional<TokenLines> asr;
  if (paths.asr) asr = read_token_lines(*paths.asr);
  return build_corpus(enc, dec, asr ? &*asr : nullptr, vocab, spec);
}

}  // namespace dualseq::data
