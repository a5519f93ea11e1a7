#include "dualseq/nn/layers.hpp"

#include <fmt/format.h>

#include "dualseq/errors.hpp"

namespace dualseq::nn {

using ad::Parameter;
using ad::Shape;
using ad::Tensor;
using ad::Var;

GruLayer::GruLayer(const std::string& prefix, std::size_t in, std::size_t hidden)
    : input_dim(in),
      hidden_dim(hidden),
      w_z(prefix + ".w_z", Tensor(Shape{in, hidden})),
      w_r(prefix + ".w_r", Tensor(Shape{in, hidden})),
      w_h(prefix + ".w_h", Tensor(Shape{in, hidden})),
      u_z(prefix + ".u_z", Tensor(Shape{hidden, hidden})),
      u_r(prefix + ".u_r", Tensor(Shape{hidden, hidden})),
      u_h(prefix + ".u_h", Tensor(Shape{hidden, hidden})),
      b_z(prefix + ".b_z", Tensor(Shape{hidden})),
      b_r(prefix + ".b_r", Tensor(Shape{hidden})),
      b_h(prefix + ".b_h", Tensor(Shape{hidden})) {}

std::vector<Parameter*> GruLayer::parameters() { return {&w_z, &w_r, &w_h, &u_z, &u_r, &u_h, &b_z, &b_r, &b_h}; }

std::vector<const Parameter*> GruLayer::parameters() const {
  return {&w_z, &w_r, &w_h, &u_z, &u_r, &u_h, &b_z, &b_r, &b_h};
}

GruVars bind(ad::Graph& g, GruLayer& layer, bool trainable) {
  auto b = [&](Parameter& p) { return trainable ? g.param(p) : g.frozen(p); };
  return GruVars{b(layer.w_z), b(layer.w_r), b(layer.w_h), b(layer.u_z), b(layer.u_r),
                 b(layer.u_h), b(layer.b_z), b(layer.b_r), b(layer.b_h), layer.input_dim, layer.hidden_dim};
}

std::vector<GruVars> bind(ad::Graph& g, std::span<GruLayer> layers, bool trainable) {
  std::vector<GruVars> out;
  out.reserve(layers.size());
  for (auto& l : layers) out.push_back(bind(g, l, trainable));
  return out;
}

Var gru_step(const GruVars& p, Var h_prev, Var x) {
  const auto& hs = h_prev.shape();
  const auto& xs = x.shape();
  if (hs.size() != 2 || xs.size() != 2 || hs[1] != p.hidden_dim || xs[1] != p.input_dim || hs[0] != xs[0]) {
    throw DimensionError(fmt::format("gru_step: h {} / x {} do not fit a {}->{} layer", ad::shape_string(hs),
                                     ad::shape_string(xs), p.input_dim, p.hidden_dim));
  }
  auto& g = *x.graph;
  Var z = ad::sigmoid(ad::add_bias(ad::add(ad::matmul(x, p.w_z), ad::matmul(h_prev, p.u_z)), p.b_z));
  Var r = ad::sigmoid(ad::add_bias(ad::add(ad::matmul(x, p.w_r), ad::matmul(h_prev, p.u_r)), p.b_r));
  Var cand = ad::tanh(ad::add_bias(ad::add(ad::matmul(x, p.w_h), ad::matmul(ad::mul(r, h_prev), p.u_h)), p.b_h));
  Var keep = ad::sub(g.constant(Tensor::scalar(1.0)), z);
  return ad::add(ad::mul(keep, h_prev), ad::mul(z, cand));
}

StackedOutput stacked_forward(std::span<const GruVars> layers, std::span<const Var> h_prev, Var x) {
  if (layers.size() != h_prev.size()) {
    throw ContractError(fmt::format("stacked_forward: {} layers but {} previous states", layers.size(), h_prev.size()));
  }
  if (layers.empty()) throw ContractError("stacked_forward: no layers");
  StackedOutput out;
  out.hidden.reserve(layers.size());
  Var input = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    input = gru_step(layers[i], h_prev[i], input);
    out.hidden.push_back(input);
  }
  out.top = input;
  return out;
}

Var embed(Var table, std::span<const TokenId> ids) { return ad::gather_rows(table, ids); }

void init_uniform(Tensor& t, double lo, double hi, Rng& rng) {
  for (auto& x : t.data()) x = rng.uniform(lo, hi);
}

void init_gru(GruLayer& layer, double scale, Rng& rng) {
  for (auto* p : {&layer.w_z, &layer.w_r, &layer.w_h, &layer.u_z, &layer.u_r, &layer.u_h}) {
    init_uniform(p->value, -scale, scale, rng);
  }
  for (auto* p : {&layer.b_z, &layer.b_r, &layer.b_h}) p->value.fill(0.0);
}

}  // namespace dualseq::nn
