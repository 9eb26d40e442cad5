#pragma once

#include <optional>

#include "atnet/common/grid.hpp"
#include "atnet/dataset/clip.hpp"

namespace atnet::pre {

/// Rec.601 luma of an 8-bit frame, scaled to [0, 1].
Image to_gray(const data::Frame& frame);

/// Bilinear resize with pixel-centre alignment: output pixel (r, c) samples
/// the source at ((r + 0.5) * H / h - 0.5, (c + 0.5) * W / w - 0.5), clamped
/// to the image. Same-size resizes are exact copies.
Image resize_bilinear(const Image& src, int rows, int cols);

/// Crop to `bbox` (whole frame when absent), grayscale, resize to size x size,
/// intensities in [0, 1]. A bbox with zero area or outside the frame is a
/// DataError.
Image normalize_frame(const data::Frame& frame, const std::optional<data::BBox>& bbox, int size);

}  // namespace atnet::pre
