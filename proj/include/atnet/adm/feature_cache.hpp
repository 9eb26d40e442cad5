#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "atnet/common/grid.hpp"

namespace atnet::adm {

/// Cache layout: "ADMF", u16 version, u32 rows, u32 cols, then rows * cols
/// float32 values row-major; all little-endian.
inline constexpr std::uint16_t kFeatureCacheVersion = 1;

std::vector<std::uint8_t> serialize_feature(const Grid& feature);
/// Throws BadMagicError, VersionError or TruncatedError. Values come back
/// as the float32 narrowing of what was stored.
Grid deserialize_feature(std::span<const std::uint8_t> bytes);

/// Rounds every value through float32, as a write/read cycle would.
Grid narrow_to_float(const Grid& feature);

void save_feature(const std::filesystem::path& path, const Grid& feature);
Grid load_feature(const std::filesystem::path& path);

}  // namespace atnet::adm
