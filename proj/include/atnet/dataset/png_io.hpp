#pragma once

#include <filesystem>

#include "atnet/dataset/clip.hpp"

namespace atnet::data {

/// Decodes any PNG to 8-bit gray or RGB (alpha stripped, palette expanded,
/// 16-bit reduced).
Frame read_png(const std::filesystem::path& path);

/// Encodes an 8-bit gray or RGB frame. Output bytes depend only on the
/// pixel data (no time chunks).
void write_png(const std::filesystem::path& path, const Frame& frame);

}  // namespace atnet::data
