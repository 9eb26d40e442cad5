#include "atnet/adm/feature_cache.hpp"

#include "atnet/common/binary_io.hpp"
#include "atnet/common/error.hpp"

namespace atnet::adm {

std::vector<std::uint8_t> serialize_feature(const Grid& feature) {
  ByteWriter w;
  w.bytes("ADMF");
  w.u16(kFeatureCacheVersion);
  w.u32(static_cast<std::uint32_t>(feature.rows()));
  w.u32(static_cast<std::uint32_t>(feature.cols()));
  for (double v : feature.values()) w.f32(static_cast<float>(v));
  return w.take();
}

Grid deserialize_feature(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "feature cache");
  if (r.bytes(4) != "ADMF") throw BadMagicError("feature cache: bad magic (expected ADMF)");
  const auto version = r.u16();
  if (version != kFeatureCacheVersion) {
    throw VersionError("feature cache: unsupported version " + std::to_string(version));
  }
  const auto rows = r.u32();
  const auto cols = r.u32();
  const auto count = static_cast<std::uint64_t>(rows) * cols;
  if (count * 4 > r.remaining()) {
    throw TruncatedError("feature cache: payload holds " + std::to_string(r.remaining()) + " bytes, need " +
                         std::to_string(count * 4));
  }
  if (r.remaining() != count * 4) throw FormatError("feature cache: trailing bytes after payload");
  std::vector<double> values(count);
  for (auto& v : values) v = r.f32();
  return Grid(static_cast<int>(rows), static_cast<int>(cols), std::move(values));
}

Grid narrow_to_float(const Grid& feature) {
  Grid out = feature;
  for (auto& v : out.values()) v = static_cast<float>(v);
  return out;
}

void save_feature(const std::filesystem::path& path, const Grid& feature) {
  write_file_atomic(path, serialize_feature(feature));
}

Grid load_feature(const std::filesystem::path& path) {
  return deserialize_feature(read_file_bytes(path));
}

}  // namespace atnet::adm
