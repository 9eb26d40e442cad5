#include "atnet/model/checkpoint.hpp"

#include "atnet/common/binary_io.hpp"
#include "atnet/common/error.hpp"

namespace atnet::model {

namespace {

void put_i32(ByteWriter& w, int v) { w.u32(static_cast<std::uint32_t>(v)); }
int get_i32(ByteReader& r) { return static_cast<int>(r.u32()); }

}  // namespace

std::vector<std::uint8_t> serialize_params(const ModelParams& params) {
  const auto& c = params.config;
  ByteWriter w;
  w.bytes("ATNW");
  w.u16(kCheckpointVersion);
  put_i32(w, c.embed_dim);
  put_i32(w, c.classes);
  w.f64(c.dropout_p);
  w.f64(c.bn_momentum);
  w.bytes(std::string(1, static_cast<char>(params.mode)));
  put_i32(w, c.spatial.input_size);
  put_i32(w, c.spatial.stem_kernel);
  put_i32(w, c.spatial.stem_stride);
  put_i32(w, c.spatial.blocks_per_stage);
  w.u32(static_cast<std::uint32_t>(c.spatial.widths.size()));
  for (std::size_t i = 0; i < c.spatial.widths.size(); ++i) {
    put_i32(w, c.spatial.widths[i]);
    put_i32(w, c.spatial.strides[i]);
  }
  put_i32(w, c.temporal.layers);
  put_i32(w, c.temporal.hidden);
  put_i32(w, c.temporal.steps);
  put_i32(w, c.temporal.input_dim);

  w.u32(static_cast<std::uint32_t>(params.specs.size()));
  for (const auto& spec : params.specs) {
    const auto& t = params.at(spec.name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : t.values()) w.f64(v);
  }
  return w.take();
}

ModelParams deserialize_params(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  if (r.bytes(4) != "ATNW") throw BadMagicError("checkpoint: bad magic (expected ATNW)");
  const auto version = r.u16();
  if (version != kCheckpointVersion) throw VersionError("checkpoint: unsupported version " + std::to_string(version));

  ModelConfig c;
  c.embed_dim = get_i32(r);
  c.classes = get_i32(r);
  c.dropout_p = r.f64();
  c.bn_momentum = r.f64();
  const auto mode_byte = static_cast<std::uint8_t>(r.bytes(1)[0]);
  if (mode_byte > 2) throw FormatError("checkpoint: bad stream mode " + std::to_string(mode_byte));
  c.spatial.input_size = get_i32(r);
  c.spatial.stem_kernel = get_i32(r);
  c.spatial.stem_stride = get_i32(r);
  c.spatial.blocks_per_stage = get_i32(r);
  const auto stages = r.u32();
  if (stages > 64) throw FormatError("checkpoint: implausible stage count " + std::to_string(stages));
  c.spatial.widths.clear();
  c.spatial.strides.clear();
  for (std::uint32_t i = 0; i < stages; ++i) {
    c.spatial.widths.push_back(get_i32(r));
    c.spatial.strides.push_back(get_i32(r));
  }
  c.temporal.layers = get_i32(r);
  c.temporal.hidden = get_i32(r);
  c.temporal.steps = get_i32(r);
  c.temporal.input_dim = get_i32(r);

  ModelParams p;
  p.config = c;
  p.mode = static_cast<StreamMode>(mode_byte);
  try {
    p.specs = param_specs(c, p.mode);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: stored config is invalid: ") + e.what());
  }

  const auto count = r.u32();
  if (count != p.specs.size()) {
    throw FormatError("checkpoint: holds " + std::to_string(count) + " tensors, config needs " +
                      std::to_string(p.specs.size()));
  }
  for (const auto& spec : p.specs) {
    const auto rank = r.u32();
    ad::Shape shape;
    for (std::uint32_t k = 0; k < rank && k < 8; ++k) shape.push_back(r.u32());
    if (shape != spec.shape) {
      throw FormatError("checkpoint: tensor '" + spec.name + "' has shape " + ad::shape_string(shape) +
                        ", expected " + ad::shape_string(spec.shape));
    }
    std::vector<double> values(ad::shape_size(shape));
    for (auto& v : values) v = r.f64();
    p.tensors.emplace(spec.name, ad::Tensor(shape, std::move(values)));
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes after last tensor");
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  write_file_atomic(path, serialize_params(params));
}

ModelParams load_checkpoint(const std::filesystem::path& path) { return deserialize_params(read_file_bytes(path)); }

}  // namespace atnet::model
