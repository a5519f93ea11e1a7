#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dualseq/autodiff/tensor.hpp"

namespace dualseq::nn {

struct AdamConfig {
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of `param` in place. `t` is the 1-based
/// step number shared by all parameters of the optimizer.
void adam_update(const AdamConfig& cfg, std::uint64_t t, ad::Tensor& param, const ad::Tensor& grad, ad::Tensor& m,
                 ad::Tensor& v);

class Adam {
 public:
  struct Slot {
    ad::Parameter* param;
    ad::Tensor m;
    ad::Tensor v;
  };

  Adam(std::vector<ad::Parameter*> params, AdamConfig cfg);

  /// Advances t once and updates every parameter from its grad. Throws
  /// NumericError naming the first parameter that becomes non-finite.
  void step();

  std::uint64_t t() const { return t_; }
  void set_t(std::uint64_t t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }
  std::span<Slot> slots() { return slots_; }
  std::span<const Slot> slots() const { return slots_; }

 private:
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<Slot> slots_;
};

/// sqrt of the sum of squares over every gradient. NaN/Inf in a gradient
/// throws NumericError naming that parameter.
double global_grad_norm(std::span<ad::Parameter* const> params);

/// Global-norm clipping: when the norm exceeds `threshold` every gradient is
/// scaled by threshold / norm. Returns the norm before clipping.
double clip_gradients(std::span<ad::Parameter* const> params, double threshold);

}  // namespace dualseq::nn
