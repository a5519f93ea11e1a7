#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dualseq/autodiff/graph.hpp"
#include "dualseq/rng.hpp"

namespace dualseq::nn {

using ad::TokenId;

/// One GRU layer. Input weights are [input_dim x hidden_dim], recurrent
/// weights [hidden_dim x hidden_dim], biases [hidden_dim].
///
///   z  = sigmoid(x W_z + h U_z + b_z)
///   r  = sigmoid(x W_r + h U_r + b_r)
///   h~ = tanh(x W_h + (r * h) U_h + b_h)
///   h' = (1 - z) * h + z * h~
struct GruLayer {
  GruLayer(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

  std::size_t input_dim;
  std::size_t hidden_dim;
  ad::Parameter w_z, w_r, w_h;
  ad::Parameter u_z, u_r, u_h;
  ad::Parameter b_z, b_r, b_h;

  std::vector<ad::Parameter*> parameters();
  std::vector<const ad::Parameter*> parameters() const;
};

/// A GruLayer's parameters bound into one graph.
struct GruVars {
  ad::Var w_z, w_r, w_h;
  ad::Var u_z, u_r, u_h;
  ad::Var b_z, b_r, b_h;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

/// Binds as differentiable leaves when `trainable`, else as constants.
GruVars bind(ad::Graph& g, GruLayer& layer, bool trainable);
std::vector<GruVars> bind(ad::Graph& g, std::span<GruLayer> layers, bool trainable);

/// One recurrence step on a batch: h_prev [B x hidden], x [B x input].
ad::Var gru_step(const GruVars& layer, ad::Var h_prev, ad::Var x);

struct StackedOutput {
  std::vector<ad::Var> hidden;  // new state per layer, bottom first
  ad::Var top;
};

/// Runs one step through a layer stack; layer i consumes layer i-1's output.
StackedOutput stacked_forward(std::span<const GruVars> layers, std::span<const ad::Var> h_prev, ad::Var x);

/// Embedding lookup, one row per id.
ad::Var embed(ad::Var table, std::span<const TokenId> ids);

void init_uniform(ad::Tensor& t, double lo, double hi, Rng& rng);

/// Weights uniform in [-scale, scale], biases zero.
void init_gru(GruLayer& layer, double scale, Rng& rng);

}  // namespace dualseq::nn
