#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "atnet/autodiff/tensor.hpp"
#include "atnet/model/config.hpp"

namespace atnet::model {

enum class ParamKind : std::uint8_t {
  Conv,
  BnGamma,
  BnBeta,
  BnRunningMean,
  BnRunningVar,
  LinearWeight,
  LinearBias,
  LstmInput,
  LstmRecurrent,
  LstmBias,
};

struct ParamSpec {
  std::string name;
  ad::Shape shape;
  ParamKind kind;

  /// Running batch-norm statistics are state, not trainable weights.
  bool trainable() const { return kind != ParamKind::BnRunningMean && kind != ParamKind::BnRunningVar; }
};

/// Every tensor of the network for a given config and stream mode, in the
/// fixed order used by checkpoints.
///
/// LSTM layer l holds w_ih [4H, in], w_hh [H, 4H] and one bias [4H]; gate
/// blocks are ordered input, forget, cell, output. w_hh is stored
/// input-major so h [N, H] times w_hh gives the gate pre-activations.
std::vector<ParamSpec> param_specs(const ModelConfig& config, StreamMode mode);

struct ModelParams {
  ModelConfig config;
  StreamMode mode = StreamMode::Fusion;
  std::vector<ParamSpec> specs;
  std::map<std::string, ad::Tensor, std::less<>> tensors;

  const ad::Tensor& at(const std::string& name) const;
  ad::Tensor& at(const std::string& name);

  /// FNV-1a over the little-endian bytes of every tensor in spec order.
  std::uint64_t checksum() const;
  std::size_t trainable_count() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.mode == b.mode && a.tensors == b.tensors;
  }
};

/// Random initialisation: He-normal convolutions, orthogonal recurrent
/// gate blocks, uniform +-1/sqrt(fan_in) for input and linear matrices,
/// zero biases except the LSTM forget gate (1), batch-norm scale 1 and
/// shift 0, running mean 0 and variance 1.
ModelParams init_params(const ModelConfig& config, StreamMode mode, std::uint64_t seed);

}  // namespace atnet::model
