#include "dualseq/nn/optim.hpp"

#include <cmath>

#include <fmt/format.h>

#include "dualseq/errors.hpp"

namespace dualseq::nn {

void adam_update(const AdamConfig& cfg, std::uint64_t t, ad::Tensor& param, const ad::Tensor& grad, ad::Tensor& m,
                 ad::Tensor& v) {
  if (param.shape() != grad.shape() || m.shape() != param.shape() || v.shape() != param.shape()) {
    throw DimensionError("adam_update: parameter, gradient and moment shapes differ");
  }
  if (t == 0) throw ContractError("adam_update: step counter must be >= 1");
  const double td = static_cast<double>(t);
  const double c1 = 1.0 - std::pow(cfg.beta1, td);
  const double c2 = 1.0 - std::pow(cfg.beta2, td);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    param[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
  }
}

Adam::Adam(std::vector<ad::Parameter*> params, AdamConfig cfg) : cfg_(cfg) {
  slots_.reserve(params.size());
  for (auto* p : params) slots_.push_back(Slot{p, ad::Tensor(p->value.shape(), 0.0), ad::Tensor(p->value.shape(), 0.0)});
}

void Adam::step() {
  ++t_;
  for (auto& s : slots_) {
    adam_update(cfg_, t_, s.param->value, s.param->grad, s.m, s.v);
    if (!s.param->value.all_finite()) {
      throw NumericError(fmt::format("adam step {}: parameter {} became non-finite", t_, s.param->name));
    }
  }
}

double global_grad_norm(std::span<ad::Parameter* const> params) {
  double sq = 0.0;
  for (const auto* p : params) {
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p->name);
    for (double g : p->grad.data()) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_gradients(std::span<ad::Parameter* const> params, double threshold) {
  const double norm = global_grad_norm(params);
  if (norm > threshold) {
    const double scale = threshold / norm;
    for (auto* p : params)
      for (auto& g : p->grad.data()) g *= scale;
  }
  return norm;
}

}  // namespace dualseq::nn
