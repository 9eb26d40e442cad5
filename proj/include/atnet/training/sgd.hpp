#pragma once

#include <map>
#include <string>

#include "atnet/autodiff/graph.hpp"
#include "atnet/model/params.hpp"

namespace atnet::train {

/// SGD with momentum and decoupled weight decay:
///   v <- momentum * v + g
///   w <- w * (1 - lr * weight_decay) - lr * v
/// Only trainable tensors that received a gradient are touched.
class Sgd {
 public:
  Sgd(double momentum, double weight_decay) : momentum_(momentum), weight_decay_(weight_decay) {}

  void step(model::ModelParams& params, const ad::Gradients& grads, double lr);

  const std::map<std::string, ad::Tensor, std::less<>>& velocity() const { return velocity_; }

 private:
  double momentum_;
  double weight_decay_;
  std::map<std::string, ad::Tensor, std::less<>> velocity_;
};

}  // namespace atnet::train
