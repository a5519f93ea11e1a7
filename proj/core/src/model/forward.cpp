#include "dualseq/model/forward.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dualseq/data/vocab.hpp"
#include "dualseq/errors.hpp"

namespace dualseq::model {

using ad::Shape;
using ad::Tensor;
using ad::Var;

namespace {

nn::GruVars bind_frozen(ad::Graph& g, const nn::GruLayer& l) {
  return nn::GruVars{g.frozen(l.w_z), g.frozen(l.w_r), g.frozen(l.w_h), g.frozen(l.u_z), g.frozen(l.u_r),
                     g.frozen(l.u_h), g.frozen(l.b_z), g.frozen(l.b_r), g.frozen(l.b_h), l.input_dim, l.hidden_dim};
}

std::vector<nn::GruVars> bind_frozen(ad::Graph& g, const std::vector<nn::GruLayer>& layers) {
  std::vector<nn::GruVars> out;
  for (const auto& l : layers) out.push_back(bind_frozen(g, l));
  return out;
}

std::size_t longest(TokenBatch batch) {
  std::size_t n = 0;
  for (const auto& s : batch) n = std::max(n, s.size());
  return n;
}

std::vector<Var> zero_state(ad::Graph& g, std::size_t batch, const nn::ModelDims& d) {
  std::vector<Var> h;
  for (std::size_t l = 0; l < d.num_layers; ++l) h.push_back(g.constant(Tensor(Shape{batch, d.hidden_dim}, 0.0)));
  return h;
}

}  // namespace

Binding Binding::all() { return Binding{true, true, true, true, true, true, true}; }

BoundModel::BoundModel(ad::Graph& g, DualModel& m, const Binding& b) : graph(&g), dims(m.dims()) {
  auto emb = [&](bool trainable) { return trainable ? g.param(m.embedding) : g.frozen(m.embedding); };
  embed_text = emb(b.embedding_text);
  embed_asr = emb(b.embedding_asr);
  embed_dec = emb(b.embedding_dec);
  enc_text = b.enc_text ? nn::bind(g, std::span(m.enc_text), true) : bind_frozen(g, m.enc_text);
  enc_asr = b.enc_asr ? nn::bind(g, std::span(m.enc_asr), true) : bind_frozen(g, m.enc_asr);
  dec = b.dec ? nn::bind(g, std::span(m.dec), true) : bind_frozen(g, m.dec);
  out_w = b.out ? g.param(m.out_w) : g.frozen(m.out_w);
  out_b = b.out ? g.param(m.out_b) : g.frozen(m.out_b);
}

BoundModel::BoundModel(ad::Graph& g, const DualModel& m) : graph(&g), dims(m.dims()) {
  embed_text = embed_asr = embed_dec = g.frozen(m.embedding);
  enc_text = bind_frozen(g, m.enc_text);
  enc_asr = bind_frozen(g, m.enc_asr);
  dec = bind_frozen(g, m.dec);
  out_w = g.frozen(m.out_w);
  out_b = g.frozen(m.out_b);
}

Var flatten(const Summary& s) {
  if (s.layers.empty()) throw ContractError("summary has no layers");
  Var flat = s.layers[0];
  for (std::size_t i = 1; i < s.layers.size(); ++i) flat = ad::concat(flat, s.layers[i]);
  return flat;
}

Summary encode(BoundModel& m, Origin which, TokenBatch tokens) {
  if (tokens.empty()) throw ContractError("encode: empty batch");
  for (const auto& s : tokens) {
    if (s.empty()) throw ContractError("encode: empty input sequence");
  }
  auto& g = *m.graph;
  const auto& layers = which == Origin::Text ? m.enc_text : m.enc_asr;
  const Var table = which == Origin::Text ? m.embed_text : m.embed_asr;
  const std::size_t batch = tokens.size();
  const std::size_t steps = longest(tokens);

  std::vector<Var> h = zero_state(g, batch, m.dims);
  std::vector<TokenId> ids(batch);
  std::vector<std::uint8_t> active(batch);
  for (std::size_t t = 0; t < steps; ++t) {
    bool all_active = true;
    for (std::size_t r = 0; r < batch; ++r) {
      active[r] = t < tokens[r].size();
      ids[r] = active[r] ? tokens[r][t] : data::kPad;
      all_active = all_active && active[r];
    }
    auto next = nn::stacked_forward(layers, h, nn::embed(table, ids));
    for (std::size_t l = 0; l < h.size(); ++l) {
      h[l] = all_active ? next.hidden[l] : ad::where_rows(active, next.hidden[l], h[l]);
    }
  }
  return Summary{std::move(h), which};
}

void TrainPhase::validate() const {
  if ((phase == Phase::Phase2) != loss_mode.has_value()) {
    throw ContractError("a loss mode is required for phase 2 and only for phase 2");
  }
}

GateMode gate_mode(const TrainPhase& phase) {
  phase.validate();
  return phase.phase == Phase::Phase1 ? GateMode::Phase1 : GateMode::Phase2;
}

const Summary& asr_gate(GateMode mode, const Summary* c_o, const Summary* c_a) {
  switch (mode) {
    case GateMode::Phase1:
    case GateMode::TextInference:
      if (c_o == nullptr) throw ContractError("ASR gate: text summary c_o required");
      return *c_o;
    case GateMode::Phase2:
      if (c_o == nullptr || c_a == nullptr) throw ContractError("ASR gate: phase 2 needs both c_o and c_a");
      return *c_a;
    case GateMode::AsrInference:
      if (c_a == nullptr) throw ContractError("ASR gate: ASR summary c_a required");
      return *c_a;
  }
  throw ContractError("ASR gate: unknown mode");
}

Var coherence_loss(const Summary& c_o, const Summary& c_a) {
  if (c_o.layers.size() != c_a.layers.size()) {
    throw DimensionError(fmt::format("coherence_loss: {} vs {} summary layers", c_o.layers.size(), c_a.layers.size()));
  }
  return ad::sum_squared_diff(flatten(c_o), flatten(c_a));
}

Var decoder_logits(BoundModel& m, const Summary& c, TokenBatch targets) {
  if (targets.empty()) throw ContractError("decoder: empty batch");
  for (const auto& t : targets) {
    if (t.empty()) throw ContractError("decoder: empty target sequence");
  }
  const std::size_t batch = targets.size();
  if (c.layers.size() != m.dec.size() || c.top().shape()[0] != batch) {
    throw DimensionError(fmt::format("decoder: summary of {} layers x {} rows for {} decoder layers x {} targets",
                                     c.layers.size(), c.top().shape()[0], m.dec.size(), batch));
  }
  const std::size_t steps = longest(targets);
  std::vector<Var> h = c.layers;
  std::vector<Var> tops;
  tops.reserve(steps);
  std::vector<TokenId> ids(batch);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < batch; ++r) {
      ids[r] = t == 0 ? data::kGo : (t - 1 < targets[r].size() ? targets[r][t - 1] : data::kPad);
    }
    Var x = ad::concat(nn::embed(m.embed_dec, ids), c.top());
    auto next = nn::stacked_forward(m.dec, h, x);
    h = std::move(next.hidden);
    tops.push_back(next.top);
  }
  return ad::add_bias(ad::matmul(ad::row_stack(tops), m.out_w), m.out_b);
}

Var decode_teacher_forced(BoundModel& m, const Summary& c, TokenBatch targets) {
  Var logits = decoder_logits(m, c, targets);
  const std::size_t batch = targets.size();
  const std::size_t steps = longest(targets);
  std::vector<TokenId> flat(steps * batch, data::kPad);
  std::vector<double> mask(steps * batch, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < batch; ++r) {
      if (t < targets[r].size()) {
        flat[t * batch + r] = targets[r][t];
        mask[t * batch + r] = 1.0;
      }
    }
  }
  return ad::cross_entropy(logits, flat, mask);
}

std::vector<std::vector<TokenId>> decode_greedy(BoundModel& m, const Summary& c, std::size_t max_len) {
  if (max_len == 0) throw ContractError("decode_greedy: max_len must be >= 1");
  const std::size_t batch = c.top().shape()[0];
  std::vector<std::vector<TokenId>> out(batch);
  std::vector<bool> done(batch, false);
  std::vector<TokenId> ids(batch, data::kGo);
  std::vector<Var> h = c.layers;
  for (std::size_t t = 0; t < max_len; ++t) {
    Var x = ad::concat(nn::embed(m.embed_dec, ids), c.top());
    auto next = nn::stacked_forward(m.dec, h, x);
    h = std::move(next.hidden);
    const Tensor& logits = ad::add_bias(ad::matmul(next.top, m.out_w), m.out_b).value();
    const std::size_t v = logits.cols();
    bool all_done = true;
    for (std::size_t r = 0; r < batch; ++r) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < v; ++j) {
        if (logits.at(r, j) > logits.at(r, best)) best = j;
      }
      ids[r] = static_cast<TokenId>(best);
      if (!done[r]) {
        if (ids[r] == data::kEos) done[r] = true;
        else out[r].push_back(ids[r]);
      }
      all_done = all_done && done[r];
    }
    if (all_done) break;
  }
  return out;
}

std::vector<std::vector<TokenId>> respond(const DualModel& model, Origin encoder, TokenBatch inputs,
                                          std::size_t max_len) {
  ad::Graph g;
  BoundModel m(g, model);
  Summary c = encode(m, encoder, inputs);
  const GateMode mode = encoder == Origin::Text ? GateMode::TextInference : GateMode::AsrInference;
  const Summary& routed = encoder == Origin::Text ? asr_gate(mode, &c, nullptr) : asr_gate(mode, nullptr, &c);
  return decode_greedy(m, routed, max_len);
}

}  // namespace dualseq::model
