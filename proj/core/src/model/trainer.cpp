#include "dualseq/model/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dualseq/errors.hpp"
#include "dualseq/rng.hpp"

namespace dualseq::model {

namespace {

std::string loss_text(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string("-"); }

std::vector<ad::Parameter*> collect(DualModel& m, Objective o) {
  std::vector<ad::Parameter*> out;
  for (Group g : trained_groups(o)) {
    auto part = m.parameters(g);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void require_stage(const DualModel& m, Objective o) {
  const Stage s = m.stage;
  bool ok = false;
  switch (o) {
    case Objective::Phase1: ok = s == Stage::Initialized || s == Stage::Phase1; break;
    case Objective::FineTune: ok = s == Stage::Phase1 || s == Stage::FineTuned; break;
    case Objective::Phase2Coherence:
    case Objective::Phase2Combined: ok = s == Stage::Phase1 || s == Stage::Phase2; break;
  }
  if (ok) return;
  if (s == Stage::Initialized) throw ContractError(fmt::format("{}: run phase 1 first", objective_name(o)));
  throw ContractError(fmt::format("{}: not valid on a model at stage {}", objective_name(o), stage_name(s)));
}

std::vector<std::vector<TokenId>> sources(std::span<const data::DialogExample> batch) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) out.push_back(ex.src);
  return out;
}

std::vector<std::vector<TokenId>> asr_sources(std::span<const data::DialogExample> batch) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) {
    if (!ex.asr) throw ContractError("phase 2 needs an ASR variant for every example");
    out.push_back(*ex.asr);
  }
  return out;
}

std::vector<std::vector<TokenId>> targets(std::span<const data::DialogExample> batch) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) out.push_back(ex.tgt);
  return out;
}

std::string moment_name(const char* which, const std::string& param) { return fmt::format("adam.{}/{}", which, param); }

}  // namespace

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::Phase1: return "phase1";
    case Objective::FineTune: return "finetune";
    case Objective::Phase2Coherence: return "phase2-coherence";
    case Objective::Phase2Combined: return "phase2-combined";
  }
  return "?";
}

TrainPhase train_phase(Objective o) {
  switch (o) {
    case Objective::Phase2Coherence: return TrainPhase::phase2(LossMode::CoherenceOnly);
    case Objective::Phase2Combined: return TrainPhase::phase2(LossMode::Combined);
    default: return TrainPhase::phase1();
  }
}

Stage stage_after(Objective o) {
  switch (o) {
    case Objective::Phase1: return Stage::Phase1;
    case Objective::FineTune: return Stage::FineTuned;
    default: return Stage::Phase2;
  }
}

std::vector<Group> trained_groups(Objective o) {
  switch (o) {
    case Objective::Phase1:
    case Objective::FineTune: return {Group::Embedding, Group::EncText, Group::Decoder, Group::Output};
    case Objective::Phase2Coherence: return {Group::EncAsr};
    case Objective::Phase2Combined: return {Group::EncAsr, Group::Decoder, Group::Output};
  }
  return {};
}

std::string StepRecord::to_string() const {
  const char* phase = objective == Objective::Phase1 ? "1" : objective == Objective::FineTune ? "ft" : "2";
  return fmt::format("step {} phase {} L_s {} L_c {} L {:.6f} gnorm {:.6f}", step, phase, loss_text(l_s),
                     loss_text(l_c), loss, grad_norm);
}

BatchSampler::BatchSampler(std::span<const data::DialogExample> examples, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), seed_(seed) {
  if (examples.empty()) throw ContractError("training corpus is empty");
  if (batch_size == 0) throw ContractError("batch size must be >= 1");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::size_t b = examples[i].bucket;
    if (b >= by_bucket_.size()) by_bucket_.resize(b + 1);
    by_bucket_[b].push_back(i);
  }
  for (const auto& bucket : by_bucket_) per_epoch_ += (bucket.size() + batch_size - 1) / batch_size;
}

std::vector<std::size_t> BatchSampler::batch(std::uint64_t index) const {
  const std::uint64_t epoch = index / per_epoch_;
  Rng rng(seed_, {0xba7c4ULL, epoch});
  std::vector<std::vector<std::size_t>> batches;
  batches.reserve(per_epoch_);
  for (auto bucket : by_bucket_) {
    rng.shuffle(std::span(bucket));
    for (std::size_t i = 0; i < bucket.size(); i += batch_size_) {
      const std::size_t end = std::min(bucket.size(), i + batch_size_);
      batches.emplace_back(bucket.begin() + static_cast<std::ptrdiff_t>(i),
                           bucket.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  rng.shuffle(std::span(batches));
  return batches[index % per_epoch_];
}

Trainer::Trainer(DualModel& model, Objective objective, TrainConfig config)
    : model_(&model),
      objective_(objective),
      config_(config),
      trainable_(collect(model, objective)),
      adam_(trainable_, config.adam) {
  require_stage(model, objective);
  if (config.batch_size == 0) throw ContractError("batch size must be >= 1");
  if (!(config.clip_threshold > 0.0)) throw ContractError("clip threshold must be > 0");
  const bool phase2 = objective == Objective::Phase2Coherence || objective == Objective::Phase2Combined;
  if (phase2 && model.stage == Stage::Phase1 && config.asr_init == AsrInit::CopyText) {
    const auto from = model.parameters(Group::EncText);
    const auto to = model.parameters(Group::EncAsr);
    for (std::size_t i = 0; i < from.size(); ++i) to[i]->value = from[i]->value;
  }
}

AsrInit parse_asr_init(const std::string& name) {
  if (name == "copy_text") return AsrInit::CopyText;
  if (name == "keep") return AsrInit::Keep;
  throw ContractError(fmt::format("unknown asr_init '{}' (copy_text, keep)", name));
}

const char* asr_init_name(AsrInit a) { return a == AsrInit::CopyText ? "copy_text" : "keep"; }

Trainer::Losses Trainer::forward(ad::Graph& g, std::span<const data::DialogExample> batch) {
  auto tgt = targets(batch);
  switch (objective_) {
    case Objective::Phase1:
    case Objective::FineTune: {
      Binding b;
      b.embedding_text = b.embedding_dec = b.enc_text = b.dec = b.out = true;
      BoundModel m(g, *model_, b);
      auto src = sources(batch);
      Summary c_o = encode(m, Origin::Text, src);
      ad::Var l_s = decode_teacher_forced(m, asr_gate(GateMode::Phase1, &c_o, nullptr), tgt);
      return Losses{l_s, l_s, std::nullopt};
    }
    case Objective::Phase2Coherence:
    case Objective::Phase2Combined: {
      const bool combined = objective_ == Objective::Phase2Combined;
      // The embedding table is shared with enc_text and the decoder, so it
      // stays fixed along with enc_text.
      Binding b;
      b.enc_asr = true;
      b.dec = b.out = combined;
      BoundModel m(g, *model_, b);
      auto src = sources(batch);
      auto asr = asr_sources(batch);
      Summary c_o = encode(m, Origin::Text, src);
      Summary c_a = encode(m, Origin::Asr, asr);
      const Summary& routed = asr_gate(gate_mode(train_phase(objective_)), &c_o, &c_a);
      ad::Var l_c = coherence_loss(c_o, c_a);
      if (!combined) return Losses{l_c, std::nullopt, l_c};
      ad::Var l_s = decode_teacher_forced(m, routed, tgt);
      return Losses{ad::add(l_c, l_s), l_s, l_c};
    }
  }
  throw ContractError("unknown objective");
}

StepRecord Trainer::step(std::span<const data::DialogExample> batch) {
  if (batch.empty()) throw ContractError("empty training batch");
  for (auto* p : trainable_) p->zero_grad();
  ad::Graph g;
  Losses losses = forward(g, batch);
  StepRecord rec;
  rec.objective = objective_;
  rec.loss = losses.total.value().item();
  if (losses.l_s) rec.l_s = losses.l_s->value().item();
  if (losses.l_c) rec.l_c = losses.l_c->value().item();
  if (!std::isfinite(rec.loss)) {
    throw NumericError(fmt::format("{}: non-finite loss at step {}", objective_name(objective_), adam_.t() + 1));
  }
  g.backward(losses.total);
  rec.grad_norm = nn::clip_gradients(trainable_, config_.clip_threshold);
  adam_.step();
  rec.step = adam_.t();
  if (model_->stage != stage_after(objective_)) {
    model_->stage = stage_after(objective_);
  }
  model_->steps = adam_.t();
  return rec;
}

std::vector<StepRecord> Trainer::run(std::span<const data::DialogExample> corpus,
                                     const std::function<void(const StepRecord&)>& on_step) {
  std::vector<StepRecord> log;
  if (config_.steps == 0) return log;
  BatchSampler sampler(corpus, config_.batch_size, config_.seed);
  log.reserve(config_.steps);
  std::vector<data::DialogExample> batch;
  const std::uint64_t start = adam_.t();
  for (std::uint64_t i = 0; i < config_.steps; ++i) {
    batch.clear();
    for (std::size_t idx : sampler.batch(start + i)) batch.push_back(corpus[idx]);
    log.push_back(step(batch));
    if (on_step) on_step(log.back());
  }
  return log;
}

nn::Checkpoint Trainer::checkpoint(std::uint64_t vocab_hash) const {
  nn::Checkpoint ckpt = model_->to_checkpoint(vocab_hash);
  ckpt.optimizer_t = adam_.t();
  for (const auto& slot : adam_.slots()) {
    ckpt.blobs.emplace_back(moment_name("m", slot.param->name), slot.m);
    ckpt.blobs.emplace_back(moment_name("v", slot.param->name), slot.v);
  }
  return ckpt;
}

void Trainer::resume(const nn::Checkpoint& ckpt) {
  if (ckpt.stage != static_cast<std::uint32_t>(stage_after(objective_))) return;
  for (auto& slot : adam_.slots()) {
    const auto* m = ckpt.find(moment_name("m", slot.param->name));
    const auto* v = ckpt.find(moment_name("v", slot.param->name));
    if (m == nullptr || v == nullptr) {
      throw DataError(fmt::format("checkpoint has no optimizer state for {}", slot.param->name));
    }
    if (m->shape() != slot.param->value.shape() || v->shape() != slot.param->value.shape()) {
      throw DataError(fmt::format("optimizer state for {} has the wrong shape", slot.param->name));
    }
    slot.m = *m;
    slot.v = *v;
  }
  adam_.set_t(ckpt.optimizer_t);
  model_->steps = ckpt.optimizer_t;
}

double mean_token_loss(const DualModel& model, std::span<const data::DialogExample> corpus, Origin encoder,
                       std::size_t batch_size) {
  if (corpus.empty()) throw ContractError("mean_token_loss: empty corpus");
  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < corpus.size(); i += batch_size) {
    auto batch = corpus.subspan(i, std::min(batch_size, corpus.size() - i));
    ad::Graph g;
    BoundModel m(g, model);
    auto src = encoder == Origin::Text ? sources(batch) : asr_sources(batch);
    auto tgt = targets(batch);
    Summary c = encode(m, encoder, src);
    std::size_t n = 0;
    for (const auto& t : tgt) n += t.size();
    total += decode_teacher_forced(m, c, tgt).value().item() * static_cast<double>(n);
    tokens += n;
  }
  return total / static_cast<double>(tokens);
}

double mean_coherence(const DualModel& model, std::span<const data::DialogExample> corpus, std::size_t batch_size) {
  if (corpus.empty()) throw ContractError("mean_coherence: empty corpus");
  double total = 0.0;
  for (std::size_t i = 0; i < corpus.size(); i += batch_size) {
    auto batch = corpus.subspan(i, std::min(batch_size, corpus.size() - i));
    ad::Graph g;
    BoundModel m(g, model);
    auto src = sources(batch);
    auto asr = asr_sources(batch);
    const double l = coherence_loss(encode(m, Origin::Text, src), encode(m, Origin::Asr, asr)).value().item();
    total += l * static_cast<double>(batch.size());
  }
  return total / static_cast<double>(corpus.size());
}

}  // namespace dualseq::model
