#include "atnet/preprocess/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "atnet/common/error.hpp"

namespace atnet::pre {

AugmentParams AugmentParams::for_size(int size) {
  AugmentParams p;
  p.max_shift_px = std::max(1, static_cast<int>(std::lround(10.0 * size / 224.0)));
  return p;
}

void AugmentParams::validate() const {
  if (!(apply_probability >= 0.0 && apply_probability <= 1.0)) {
    throw ConfigError("augment: apply_probability must be in [0, 1]");
  }
  if (!(max_rotation_deg >= 0.0) || max_shift_px < 0) throw ConfigError("augment: bounds must be non-negative");
}

Image warp(const Image& src, double angle_deg, int dx, int dy) {
  const int rows = src.rows(), cols = src.cols();
  const double cy = (rows - 1) / 2.0, cx = (cols - 1) / 2.0;
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  Image out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      // Inverse map: undo the shift, then the rotation.
      const double y = r - dy - cy, x = c - dx - cx;
      double sy = cy + ca * y - sa * x;
      double sx = cx + sa * y + ca * x;
      if (angle_deg == 0.0) sy = r - dy, sx = c - dx;
      sy = std::clamp(sy, 0.0, rows - 1.0);
      sx = std::clamp(sx, 0.0, cols - 1.0);
      const int y0 = static_cast<int>(std::floor(sy)), x0 = static_cast<int>(std::floor(sx));
      const int y1 = std::min(y0 + 1, rows - 1), x1 = std::min(x0 + 1, cols - 1);
      const double fy = sy - y0, fx = sx - x0;
      const double v = (1 - fy) * ((1 - fx) * src(y0, x0) + fx * src(y0, x1)) +
                       fy * ((1 - fx) * src(y1, x0) + fx * src(y1, x1));
      // Convex weights can overshoot 1 by an ulp.
      out(r, c) = std::clamp(v, 0.0, 1.0);
    }
  return out;
}

Image augment(const Image& src, const AugmentParams& params, Rng& rng) {
  params.validate();
  if (uniform01(rng) >= params.apply_probability) return src;
  const double angle = uniform(rng, -params.max_rotation_deg, params.max_rotation_deg);
  const int dx = static_cast<int>(uniform_int(rng, -params.max_shift_px, params.max_shift_px));
  const int dy = static_cast<int>(uniform_int(rng, -params.max_shift_px, params.max_shift_px));
  return warp(src, angle, dx, dy);
}

}  // namespace atnet::pre
