#include "dualseq/model/dual_model.hpp"

#include <bit>

#include <fmt/format.h>

#include "dualseq/errors.hpp"
#include "dualseq/rng.hpp"

namespace dualseq::model {

namespace {

constexpr double kWeightScale = 0.08;

const nn::ModelDims& checked(const nn::ModelDims& d) {
  d.validate();
  return d;
}

std::vector<nn::GruLayer> make_stack(const std::string& prefix, std::size_t input_dim, const nn::ModelDims& d) {
  std::vector<nn::GruLayer> layers;
  layers.reserve(d.num_layers);
  for (std::size_t i = 0; i < d.num_layers; ++i) {
    layers.emplace_back(fmt::format("{}.{}", prefix, i), i == 0 ? input_dim : d.hidden_dim, d.hidden_dim);
  }
  return layers;
}

template <typename Layers, typename Out>
void collect(Layers& layers, Out& out) {
  for (auto& l : layers)
    for (auto* p : l.parameters()) out.push_back(p);
}

}  // namespace

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Initialized: return "initialized";
    case Stage::Phase1: return "phase1";
    case Stage::Phase2: return "phase2";
    case Stage::FineTuned: return "finetuned";
  }
  return "?";
}

DualModel::DualModel(const nn::ModelDims& dims, std::uint64_t seed)
    : embedding("embedding", ad::Tensor(ad::Shape{checked(dims).vocab_size, dims.embed_dim})),
      out_w("out.w", ad::Tensor(ad::Shape{dims.hidden_dim, dims.vocab_size})),
      out_b("out.b", ad::Tensor(ad::Shape{dims.vocab_size})),
      dims_(dims) {
  enc_text = make_stack("enc_text", dims.embed_dim, dims);
  enc_asr = make_stack("enc_asr", dims.embed_dim, dims);
  dec = make_stack("dec", dims.embed_dim + dims.hidden_dim, dims);

  Rng rng(seed);
  const double e = 0.5 / static_cast<double>(dims.embed_dim);
  nn::init_uniform(embedding.value, -e, e, rng);
  for (auto* stack : {&enc_text, &enc_asr, &dec})
    for (auto& l : *stack) nn::init_gru(l, kWeightScale, rng);
  nn::init_uniform(out_w.value, -kWeightScale, kWeightScale, rng);
  out_b.value.fill(0.0);
}

std::vector<ad::Parameter*> DualModel::parameters(Group group) {
  std::vector<ad::Parameter*> out;
  switch (group) {
    case Group::Embedding: out.push_back(&embedding); break;
    case Group::EncText: collect(enc_text, out); break;
    case Group::EncAsr: collect(enc_asr, out); break;
    case Group::Decoder: collect(dec, out); break;
    case Group::Output: out = {&out_w, &out_b}; break;
  }
  return out;
}

std::vector<const ad::Parameter*> DualModel::parameters(Group group) const {
  std::vector<const ad::Parameter*> out;
  for (auto* p : const_cast<DualModel*>(this)->parameters(group)) out.push_back(p);
  return out;
}

std::vector<ad::Parameter*> DualModel::parameters() {
  std::vector<ad::Parameter*> out;
  for (auto g : {Group::Embedding, Group::EncText, Group::EncAsr, Group::Decoder, Group::Output}) {
    auto part = parameters(g);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<const ad::Parameter*> DualModel::parameters() const {
  std::vector<const ad::Parameter*> out;
  for (auto* p : const_cast<DualModel*>(this)->parameters()) out.push_back(p);
  return out;
}

std::uint64_t DualModel::checksum(Group group) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto* p : parameters(group)) {
    for (double x : p->value.data()) {
      auto bits = std::bit_cast<std::uint64_t>(x);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

std::uint64_t DualModel::checksum() const {
  std::uint64_t h = 0;
  for (auto g : {Group::Embedding, Group::EncText, Group::EncAsr, Group::Decoder, Group::Output}) {
    h = h * 0x100000001b3ULL ^ checksum(g);
  }
  return h;
}

nn::Checkpoint DualModel::to_checkpoint(std::uint64_t vocab_hash) const {
  nn::Checkpoint ckpt;
  ckpt.dims = dims_;
  ckpt.vocab_hash = vocab_hash;
  ckpt.stage = static_cast<std::uint32_t>(stage);
  ckpt.steps = steps;
  for (const auto* p : parameters()) ckpt.blobs.emplace_back(p->name, p->value);
  return ckpt;
}

DualModel DualModel::from_checkpoint(const nn::Checkpoint& ckpt) {
  DualModel m(ckpt.dims, 0);
  if (ckpt.stage > static_cast<std::uint32_t>(Stage::FineTuned)) {
    throw DataError(fmt::format("checkpoint has unknown stage {}", ckpt.stage));
  }
  m.stage = static_cast<Stage>(ckpt.stage);
  m.steps = ckpt.steps;
  for (auto* p : m.parameters()) {
    const auto* t = ckpt.find(p->name);
    if (t == nullptr) throw DataError("checkpoint is missing parameter " + p->name);
    if (t->shape() != p->value.shape()) {
      throw DataError(fmt::format("checkpoint parameter {} has shape {}, expected {}", p->name,
                                  ad::shape_string(t->shape()), ad::shape_string(p->value.shape())));
    }
    p->value = *t;
  }
  return m;
}

}  // namespace dualseq::model
