#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dualseq/autodiff/tensor.hpp"

namespace dualseq::ad {

/// Central-difference gradient of a scalar function:
/// (f(p + step e_i) - f(p - step e_i)) / (2 step) for every coordinate i.
/// `point` is restored before returning. `step` must be > 0.
std::vector<double> finite_difference_grad(const std::function<double(std::span<const double>)>& f,
                                           std::vector<double> point, double step);

/// Same estimate, perturbing a Parameter's values in place; `loss` re-evaluates
/// the full forward pass.
Tensor finite_difference_grad(const std::function<double()>& loss, Parameter& param, double step);

/// Richardson extrapolation of two central differences,
/// (4 D(step / 2) - D(step)) / 3. Truncation error falls from O(step^2) to
/// O(step^4), so a larger step keeps rounding noise small as well.
Tensor extrapolated_difference_grad(const std::function<double()>& loss, Parameter& param, double step);

/// |a - b| / max(|a|, |b|, floor). The floor keeps coordinates whose true
/// gradient is ~0 from dominating on rounding noise.
double relative_error(double analytic, double numeric, double floor = 1e-8);

}  // namespace dualseq::ad
