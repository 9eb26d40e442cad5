#include "atnet/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "atnet/common/error.hpp"

namespace atnet::ad {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  if (shape_.empty() || std::ranges::any_of(shape_, [](std::size_t d) { return d == 0; })) {
    throw ShapeError("tensor shape must be a non-empty list of positive sizes, got " +
                     shape_string(shape_));
  }
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : Tensor(std::move(shape)) {
  if (values.size() != data_.size()) {
    throw ShapeError("tensor of shape " + shape_string(shape_) + " needs " +
                     std::to_string(data_.size()) + " values, got " + std::to_string(values.size()));
  }
  data_ = std::move(values);
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape_));
  return data_[0];
}

void Tensor::fill(double v) { std::ranges::fill(data_, v); }

bool Tensor::all_finite() const {
  return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
}

}  // namespace atnet::ad
