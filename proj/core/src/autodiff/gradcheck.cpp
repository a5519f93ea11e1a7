#include "dualseq/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dualseq/errors.hpp"

namespace dualseq::ad {

std::vector<double> finite_difference_grad(const std::function<double(std::span<const double>)>& f,
                                           std::vector<double> point, double step) {
  if (!(step > 0.0)) throw ContractError("finite_difference_grad: step must be positive");
  std::vector<double> grad(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = f(point);
    point[i] = saved - step;
    const double down = f(point);
    point[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

Tensor finite_difference_grad(const std::function<double()>& loss, Parameter& param, double step) {
  if (!(step > 0.0)) throw ContractError("finite_difference_grad: step must be positive");
  Tensor grad(param.value.shape(), 0.0);
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    const double saved = param.value[i];
    param.value[i] = saved + step;
    const double up = loss();
    param.value[i] = saved - step;
    const double down = loss();
    param.value[i] = saved;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

Tensor extrapolated_difference_grad(const std::function<double()>& loss, Parameter& param, double step) {
  const Tensor coarse = finite_difference_grad(loss, param, step);
  Tensor fine = finite_difference_grad(loss, param, step / 2.0);
  for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return fine;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace dualseq::ad
