#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "atnet/model/params.hpp"

namespace atnet::model {

/// Checkpoint layout, little-endian throughout:
///   "ATNW", u16 version,
///   config: i32 embed_dim, i32 classes, f64 dropout_p, f64 bn_momentum,
///           u8 stream mode,
///           i32 input_size, i32 stem_kernel, i32 stem_stride,
///           i32 blocks_per_stage, u32 stages, stages x (i32 width, i32 stride),
///           i32 layers, i32 hidden, i32 steps, i32 input_dim,
///   u32 tensor count, then per tensor in param_specs() order:
///           u32 rank, rank x u32 dims, f64 values.
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_params(const ModelParams& params);
/// Throws BadMagicError / VersionError / TruncatedError for container
/// damage and FormatError when tensors disagree with the stored config.
ModelParams deserialize_params(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace atnet::model
