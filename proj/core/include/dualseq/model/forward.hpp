#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dualseq/autodiff/graph.hpp"
#include "dualseq/model/dual_model.hpp"

namespace dualseq::model {

using ad::TokenId;
using TokenBatch = std::span<const std::vector<TokenId>>;

/// Which parameter groups receive gradients. The shared embedding can be
/// trainable on some read paths and frozen on others.
struct Binding {
  bool embedding_text = false;
  bool embedding_asr = false;
  bool embedding_dec = false;
  bool enc_text = false;
  bool enc_asr = false;
  bool dec = false;
  bool out = false;

  static Binding all();
  static Binding none() { return {}; }
};

/// A model's parameters bound into one graph.
struct BoundModel {
  BoundModel(ad::Graph& g, DualModel& m, const Binding& b);
  /// Everything frozen; for inference on a read-only model.
  BoundModel(ad::Graph& g, const DualModel& m);

  ad::Graph* graph;
  const nn::ModelDims dims;
  ad::Var embed_text, embed_asr, embed_dec;
  std::vector<nn::GruVars> enc_text, enc_asr, dec;
  ad::Var out_w, out_b;
};

enum class Origin { Text, Asr };

/// Final hidden state of every encoder layer, each [B x hidden].
struct Summary {
  std::vector<ad::Var> layers;
  Origin origin = Origin::Text;

  const ad::Var& top() const { return layers.back(); }
};

/// Layers concatenated: [B x (num_layers * hidden)].
ad::Var flatten(const Summary& s);

/// Runs the selected encoder left to right from a zero state. Sequences are
/// right-padded to the longest in the batch; a row's state stops changing
/// after its last real token. Throws ContractError on an empty sequence.
Summary encode(BoundModel& m, Origin which, TokenBatch tokens);

enum class Phase { Phase1, Phase2 };
enum class LossMode { CoherenceOnly, Combined };

struct TrainPhase {
  Phase phase = Phase::Phase1;
  std::optional<LossMode> loss_mode;  // present iff phase == Phase2

  static TrainPhase phase1() { return {Phase::Phase1, std::nullopt}; }
  static TrainPhase phase2(LossMode mode) { return {Phase::Phase2, mode}; }
  void validate() const;
};

enum class GateMode { Phase1, Phase2, TextInference, AsrInference };

GateMode gate_mode(const TrainPhase& phase);

/// Routes a summary to the decoder: c_o in phase 1 and for text input, c_a in
/// phase 2 and for ASR input. Phase 2 also requires c_o (for L_c). A missing
/// required summary throws ContractError.
const Summary& asr_gate(GateMode mode, const Summary* c_o, const Summary* c_a);

/// Mean over the batch of ||c_o - c_a||^2 on the flattened summaries.
ad::Var coherence_loss(const Summary& c_o, const Summary& c_a);

/// Teacher-forced decoder logits, row t*B + r holds step t of sequence r:
/// [(T*B) x vocab] with T the longest target. Step t reads
/// [embed(y_{t-1}) ; top-layer c] with y_0 = GO; the decoder state starts at c.
ad::Var decoder_logits(BoundModel& m, const Summary& c, TokenBatch targets);

/// Cross-entropy of `targets` (each ending in EOS) averaged over real tokens.
ad::Var decode_teacher_forced(BoundModel& m, const Summary& c, TokenBatch targets);

/// Argmax decoding fed back from GO until EOS or max_len tokens; ties pick
/// the lowest id. Returned sequences exclude the EOS.
std::vector<std::vector<TokenId>> decode_greedy(BoundModel& m, const Summary& c, std::size_t max_len);

/// encode -> gate -> greedy decode on a read-only model.
std::vector<std::vector<TokenId>> respond(const DualModel& model, Origin encoder, TokenBatch inputs,
                                          std::size_t max_len);

}  // namespace dualseq::model
