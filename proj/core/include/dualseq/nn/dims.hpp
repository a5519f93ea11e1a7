#pragma once

#include <cstddef>

namespace dualseq::nn {

/// Network sizes. Defaults are the full-scale settings (two 512-unit GRU
/// layers, 64-dim embeddings, 35000-word vocabulary).
struct ModelDims {
  std::size_t hidden_dim = 512;
  std::size_t num_layers = 2;
  std::size_t embed_dim = 64;
  std::size_t vocab_size = 35000;

  /// Throws ContractError unless all sizes are positive and vocab_size >= 4.
  void validate() const;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

}  // namespace dualseq::nn
