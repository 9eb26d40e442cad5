#include "atnet/preprocess/frame.hpp"

#include <algorithm>
#include <cmath>

#include "atnet/common/error.hpp"

namespace atnet::pre {

Image to_gray(const data::Frame& frame) {
  Image out(frame.height, frame.width);
  for (int r = 0; r < frame.height; ++r)
    for (int c = 0; c < frame.width; ++c) {
      if (frame.channels == 1) {
        out(r, c) = frame.at(r, c) / 255.0;
      } else {
        out(r, c) = (0.299 * frame.at(r, c, 0) + 0.587 * frame.at(r, c, 1) + 0.114 * frame.at(r, c, 2)) / 255.0;
      }
    }
  return out;
}

Image resize_bilinear(const Image& src, int rows, int cols) {
  if (rows <= 0 || cols <= 0 || src.empty()) throw DataError("resize: empty source or target");
  if (rows == src.rows() && cols == src.cols()) return src;

  const double sy = static_cast<double>(src.rows()) / rows;
  const double sx = static_cast<double>(src.cols()) / cols;
  Image out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, src.rows() - 1.0);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, src.rows() - 1);
    const double fy = y - y0;
    for (int c = 0; c < cols; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, src.cols() - 1.0);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, src.cols() - 1);
      const double fx = x - x0;
      const double top = (1 - fx) * src(y0, x0) + fx * src(y0, x1);
      const double bottom = (1 - fx) * src(y1, x0) + fx * src(y1, x1);
      out(r, c) = (1 - fy) * top + fy * bottom;
    }
  }
  return out;
}

Image normalize_frame(const data::Frame& frame, const std::optional<data::BBox>& bbox, int size) {
  if (size <= 0) throw ConfigError("normalize_frame: size must be positive");
  Image gray = to_gray(frame);
  if (bbox) {
    const auto& b = *bbox;
    if (b.w <= 0 || b.h <= 0) throw DataError("normalize_frame: degenerate bbox");
    if (b.x < 0 || b.y < 0 || b.x + b.w > frame.width || b.y + b.h > frame.height) {
      throw DataError("normalize_frame: bbox outside the frame");
    }
    Image crop(b.h, b.w);
    for (int r = 0; r < b.h; ++r)
      for (int c = 0; c < b.w; ++c) crop(r, c) = gray(b.y + r, b.x + c);
    gray = std::move(crop);
  }
  return resize_bilinear(gray, size, size);
}

}  // namespace atnet::pre
