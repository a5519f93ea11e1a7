#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualseq/autodiff/tensor.hpp"
#include "dualseq/nn/checkpoint.hpp"
#include "dualseq/nn/dims.hpp"
#include "dualseq/nn/layers.hpp"

namespace dualseq::model {

/// How far a model has been trained; stored in checkpoints.
enum class Stage : std::uint32_t {
  Initialized = 0,
  Phase1 = 1,
  Phase2 = 2,
  FineTuned = 3,
};

const char* stage_name(Stage s);

enum class Group { Embedding, EncText, EncAsr, Decoder, Output };

/// Dual-encoder sequence-to-sequence parameters: one embedding table shared
/// by both encoders and the decoder, a text encoder, an ASR encoder of the
/// same shape, a decoder whose first layer reads [embedding ; top summary],
/// and a hidden -> vocab output projection.
class DualModel {
 public:
  /// Weights uniform in [-0.08, 0.08], biases zero, embeddings uniform in
  /// [-0.5/embed_dim, 0.5/embed_dim], all drawn from `seed`.
  explicit DualModel(const nn::ModelDims& dims, std::uint64_t seed = 1);

  const nn::ModelDims& dims() const { return dims_; }

  ad::Parameter embedding;  // [vocab x embed]
  std::vector<nn::GruLayer> enc_text;
  std::vector<nn::GruLayer> enc_asr;
  std::vector<nn::GruLayer> dec;
  ad::Parameter out_w;  // [hidden x vocab]
  ad::Parameter out_b;  // [vocab]

  Stage stage = Stage::Initialized;
  std::uint64_t steps = 0;  // optimizer steps taken in the current stage

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
  std::vector<ad::Parameter*> parameters(Group group);
  std::vector<const ad::Parameter*> parameters(Group group) const;

  /// FNV-1a over the raw bytes of a group's parameter values.
  std::uint64_t checksum(Group group) const;
  std::uint64_t checksum() const;

  nn::Checkpoint to_checkpoint(std::uint64_t vocab_hash) const;
  /// Throws DataError if a parameter blob is missing or has the wrong shape.
  static DualModel from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  nn::ModelDims dims_;
};

}  // namespace dualseq::model
