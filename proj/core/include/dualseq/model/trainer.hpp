#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualseq/data/corpus.hpp"
#include "dualseq/model/dual_model.hpp"
#include "dualseq/model/forward.hpp"
#include "dualseq/nn/optim.hpp"

namespace dualseq::model {

/// What one training run optimizes.
///   Phase1           L_s on (src, tgt) through enc_text
///   FineTune         L_s on (src, tgt) through enc_text, starting from a phase-1 model
///   Phase2Coherence  L_c between enc_text(src) and enc_asr(asr)
///   Phase2Combined   L_c + L_s with the decoder reading enc_asr(asr)
enum class Objective { Phase1, FineTune, Phase2Coherence, Phase2Combined };

/// Starting point of enc_asr when phase 2 begins on a phase-1 model.
///   CopyText  enc_asr takes enc_text's weights and adapts from there
///   Keep      enc_asr keeps whatever it holds (its random initialization)
enum class AsrInit { CopyText, Keep };

AsrInit parse_asr_init(const std::string& name);
const char* asr_init_name(AsrInit a);

const char* objective_name(Objective o);
TrainPhase train_phase(Objective o);
Stage stage_after(Objective o);

struct TrainConfig {
  std::uint64_t steps = 0;
  std::size_t batch_size = 64;
  nn::AdamConfig adam;
  double clip_threshold = 5.0;
  std::uint64_t seed = 1;
  AsrInit asr_init = AsrInit::CopyText;
};

struct StepRecord {
  std::uint64_t step = 0;
  Objective objective = Objective::Phase1;
  std::optional<double> l_s;
  std::optional<double> l_c;
  double loss = 0.0;
  double grad_norm = 0.0;  // before clipping

  /// "step <n> phase <1|2|ft> L_s <v> L_c <v> L <v> gnorm <v>", '-' for absent losses.
  std::string to_string() const;
};

/// Same-bucket minibatches. Each epoch shuffles every bucket, cuts it into
/// batches and shuffles the batch order, all from (seed, epoch), so batch k
/// of a run depends only on k.
class BatchSampler {
 public:
  BatchSampler(std::span<const data::DialogExample> examples, std::size_t batch_size, std::uint64_t seed);

  std::vector<std::size_t> batch(std::uint64_t index) const;
  std::size_t batches_per_epoch() const { return per_epoch_; }

 private:
  std::vector<std::vector<std::size_t>> by_bucket_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::size_t per_epoch_ = 0;
};

/// Runs one objective on a model it does not own. Only the parameter groups
/// the objective trains are handed to Adam and clipping; enc_text and the
/// shared embedding are never touched by the phase-2 objectives.
class Trainer {
 public:
  /// Throws ContractError if the model has not reached the stage the
  /// objective requires ("run phase 1 first"). A phase-2 objective on a
  /// phase-1 model applies config.asr_init first.
  Trainer(DualModel& model, Objective objective, TrainConfig config);

  /// One optimizer step on the given examples.
  StepRecord step(std::span<const data::DialogExample> batch);

  /// config.steps steps over batches drawn from `corpus`, continuing from the
  /// optimizer's current step count.
  std::vector<StepRecord> run(std::span<const data::DialogExample> corpus,
                              const std::function<void(const StepRecord&)>& on_step = {});

  const nn::Adam& optimizer() const { return adam_; }

  /// Model, stage and optimizer moments as one checkpoint.
  nn::Checkpoint checkpoint(std::uint64_t vocab_hash) const;
  /// Restores optimizer moments and step count saved for this objective's
  /// stage; a checkpoint from another stage starts a fresh optimizer.
  void resume(const nn::Checkpoint& ckpt);

 private:
  struct Losses {
    ad::Var total;
    std::optional<ad::Var> l_s, l_c;
  };
  Losses forward(ad::Graph& g, std::span<const data::DialogExample> batch);

  DualModel* model_;
  Objective objective_;
  TrainConfig config_;
  std::vector<ad::Parameter*> trainable_;
  nn::Adam adam_;
};

/// Parameter groups an objective updates.
std::vector<Group> trained_groups(Objective o);

/// Teacher-forced per-token cross-entropy over a corpus, reading src (or asr
/// when `encoder` is Asr) through the chosen encoder. exp() of it is the
/// per-token perplexity.
double mean_token_loss(const DualModel& model, std::span<const data::DialogExample> corpus, Origin encoder,
                       std::size_t batch_size = 64);

/// Mean ||c_o - c_a||^2 over a corpus with ASR variants.
double mean_coherence(const DualModel& model, std::span<const data::DialogExample> corpus,
                      std::size_t batch_size = 64);

}  // namespace dualseq::model
