#include "dualseq/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dualseq/errors.hpp"

namespace dualseq::ad {

std::string shape_string(const Shape& shape) { return fmt::format("[{}]", fmt::join(shape, "x")); }

namespace {

std::size_t checked_size(const Shape& shape) {
  if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimension of size 0 in shape " + shape_string(shape));
  }
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(checked_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  const auto expected = checked_size(shape_);
  if (expected != data_.size()) {
    throw DimensionError(fmt::format("shape {} needs {} values, got {}", shape_string(shape_), expected, data_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const auto n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(Shape{r, c}, std::move(data));
}

double Tensor::item() const {
  if (!is_scalar()) throw DimensionError("item() on non-scalar tensor of shape " + shape_string(shape_));
  return data_[0];
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.shape(), 0.0) {}

}  // namespace dualseq::ad
