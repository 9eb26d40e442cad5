#pragma once

#include "atnet/common/grid.hpp"
#include "atnet/common/random.hpp"

namespace atnet::pre {

struct AugmentParams {
  double max_rotation_deg = 5.0;
  int max_shift_px = 10;
  double apply_probability = 0.5;

  /// Shift bound of 10 px at 224 px, scaled to `size` (rounded, at least 1).
  static AugmentParams for_size(int size);
  void validate() const;
};

/// Rotates by `angle_deg` about the image centre, then translates by
/// (dx, dy) pixels (positive dx moves content right, positive dy down).
/// Samples bilinearly with edge replication; output is clamped to [0, 1].
Image warp(const Image& src, double angle_deg, int dx, int dy);

/// With probability apply_probability, warps by a random rotation and
/// integer shift; otherwise returns the image unchanged.
Image augment(const Image& src, const AugmentParams& params, Rng& rng);

}  // namespace atnet::pre
