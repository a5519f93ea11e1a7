#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dualseq::ad {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. Every dimension is >= 1, so a tensor is
/// never empty; a scalar has shape {1}.
class Tensor {
 public:
  Tensor() : Tensor(Shape{1}) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor(Shape{1}, std::vector<double>{value}); }
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool is_scalar() const { return data_.size() == 1; }

  // For rank-2 tensors; a rank-1 tensor is treated as a single row.
  std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.back(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// A trainable tensor that outlives any single computation graph.
/// `grad` has the same shape as `value` and is accumulated into by backward.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0); }
};

}  // namespace dualseq::ad
