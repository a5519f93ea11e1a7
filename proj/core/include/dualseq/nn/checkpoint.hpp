#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dualseq/autodiff/tensor.hpp"
#include "dualseq/nn/dims.hpp"

namespace dualseq::nn {

inline constexpr char kCheckpointMagic[4] = {'D', 'S', 'E', 'Q'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout, all integers and floats little-endian:
//   "DSEQ" | u32 version | u64 hidden, layers, embed, vocab | u64 vocab_hash
//   | u32 stage | u64 steps | u64 optimizer_t | u64 blob_count
//   then per blob: u32 name_len | name | u32 rank | u64 dims[rank] | f64 data[]
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelDims dims;
  std::uint64_t vocab_hash = 0;
  std::uint32_t stage = 0;
  std::uint64_t steps = 0;
  std::uint64_t optimizer_t = 0;
  std::vector<std::pair<std::string, ad::Tensor>> blobs;

  const ad::Tensor* find(const std::string& name) const;
};

/// Writes to a temporary sibling and renames over `path`, so an interrupted
/// write never leaves a truncated file at `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws DataError on I/O failure, bad magic, unknown version or truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dualseq::nn
