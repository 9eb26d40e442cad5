#include "atnet/training/sgd.hpp"

#include "atnet/common/error.hpp"

namespace atnet::train {

void Sgd::step(model::ModelParams& params, const ad::Gradients& grads, double lr) {
  const double decay = 1.0 - lr * weight_decay_;
  for (const auto& spec : params.specs) {
    if (!spec.trainable()) continue;
    auto g = grads.find(spec.name);
    if (g == grads.end()) continue;
    auto& w = params.at(spec.name);
    if (g->second.shape() != w.shape()) throw ShapeError("sgd: gradient shape mismatch for " + spec.name);
    auto [it, fresh] = velocity_.try_emplace(spec.name, w.shape());
    auto& v = it->second;
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum_ * v[i] + g->second[i];
      w[i] = w[i] * decay - lr * v[i];
    }
  }
}

}  // namespace atnet::train
