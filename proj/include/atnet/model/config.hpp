#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace atnet::model {

/// Which parts of the network feed the classifier. Single-stream variants
/// exist for ablations; their head sees only that stream's embedding.
enum class StreamMode : std::uint8_t { Fusion = 0, Spatial = 1, Temporal = 2 };

std::string to_string(StreamMode mode);
StreamMode parse_stream_mode(const std::string& text);

struct SpatialConfig {
  int input_size = 32;
  int stem_kernel = 3;
  int stem_stride = 1;
  /// Output channels of each residual stage; the stem emits widths[0].
  std::vector<int> widths{8, 16, 32};
  /// First-block stride of each stage.
  std::vector<int> strides{1, 2, 2};
  int blocks_per_stage = 1;
};

struct TemporalConfig {
  int layers = 2;
  int hidden = 32;
  /// Rows of the ADM matrix (window length - 1) and its width.
  int steps = 64;
  int input_dim = 128;
};

struct ModelConfig {
  int embed_dim = 32;
  SpatialConfig spatial;
  TemporalConfig temporal;
  double dropout_p = 0.5;
  int classes = 3;
  /// Weight on the old value when updating batch-norm running statistics.
  double bn_momentum = 0.9;

  /// S=224, D=512, 512 LSTM units, 7x7/2 stem and four stages 64..512.
  static ModelConfig paper_scale();
  /// Width of the classifier input for a stream mode (2D for fusion).
  int head_inputs(StreamMode mode) const;
  void validate() const;
};

}  // namespace atnet::model
