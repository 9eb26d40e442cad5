#include "atnet/model/config.hpp"

#include "atnet/common/error.hpp"

namespace atnet::model {

std::string to_string(StreamMode mode) {
  switch (mode) {
    case StreamMode::Fusion: return "fusion";
    case StreamMode::Spatial: return "spatial";
    case StreamMode::Temporal: return "temporal";
  }
  return "?";
}

StreamMode parse_stream_mode(const std::string& text) {
  if (text == "fusion") return StreamMode::Fusion;
  if (text == "spatial") return StreamMode::Spatial;
  if (text == "temporal") return StreamMode::Temporal;
  throw ConfigError("unknown stream mode '" + text + "' (expected fusion, spatial or temporal)");
}

ModelConfig ModelConfig::paper_scale() {
  ModelConfig c;
  c.embed_dim = 512;
  c.spatial.input_size = 224;
  c.spatial.stem_kernel = 7;
  c.spatial.stem_stride = 2;
  c.spatial.widths = {64, 128, 256, 512};
  c.spatial.strides = {2, 2, 2, 2};
  c.spatial.blocks_per_stage = 1;
  c.temporal.hidden = 512;
  return c;
}

int ModelConfig::head_inputs(StreamMode mode) const {
  return mode == StreamMode::Fusion ? 2 * embed_dim : embed_dim;
}

void ModelConfig::validate() const {
  if (embed_dim < 1) throw ConfigError("model: embed_dim must be >= 1");
  if (classes < 2) throw ConfigError("model: classes must be >= 2");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("model: dropout_p must be in [0, 1)");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw ConfigError("model: bn_momentum must be in [0, 1)");
  const auto& s = spatial;
  if (s.input_size < 1) throw ConfigError("model: spatial input size must be >= 1");
  if (s.stem_kernel < 1 || s.stem_stride < 1) throw ConfigError("model: bad stem kernel/stride");
  if (s.widths.empty() || s.widths.size() != s.strides.size()) {
    throw ConfigError("model: spatial widths and strides must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < s.widths.size(); ++i) {
    if (s.widths[i] < 1 || s.strides[i] < 1) throw ConfigError("model: spatial widths/strides must be >= 1");
  }
  if (s.blocks_per_stage < 1) throw ConfigError("model: blocks_per_stage must be >= 1");
  const auto& t = temporal;
  if (t.layers < 1) throw ConfigError("model: LSTM layers must be >= 1");
  if (t.hidden < 1 || t.steps < 1 || t.input_dim < 1) throw ConfigError("model: bad temporal dimensions");
}

}  // namespace atnet::model
