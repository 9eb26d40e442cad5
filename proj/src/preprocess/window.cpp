#include "atnet/preprocess/window.hpp"

#include <cmath>

#include "atnet/common/error.hpp"
#include "atnet/preprocess/frame.hpp"

namespace atnet::pre {

namespace {

Image sample_at(const std::vector<Image>& frames, double t) {
  const int t0 = static_cast<int>(std::floor(t));
  const double w = t - t0;
  if (w == 0.0 || t0 + 1 >= static_cast<int>(frames.size())) return frames[t0];
  const auto& a = frames[t0];
  const auto& b = frames[t0 + 1];
  Image out(a.rows(), a.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = (1 - w) * a.values()[i] + w * b.values()[i];
  return out;
}

}  // namespace

FrameWindow select_window(const std::vector<Image>& frames, int apex, int half_width) {
  const int n = static_cast<int>(frames.size());
  if (n < 2) throw DataError("select_window: clip needs at least 2 frames");
  if (apex < 0 || apex >= n) throw DataError("select_window: apex outside the clip");
  if (half_width < 1) throw ConfigError("select_window: half_width must be >= 1");
  for (const auto& f : frames) {
    if (!f.same_shape(frames.front())) throw DataError("select_window: frames differ in size");
  }

  FrameWindow win;
  win.apex_position = half_width;
  win.frames.resize(2 * half_width + 1);

  const int left = std::min(apex, half_width);
  const int right = std::min(n - 1 - apex, half_width);
  win.interpolated = left < half_width || right < half_width;

  for (int k = 0; k <= half_width; ++k) {
    // Slot half_width - k sits k steps before the apex; slot half_width + k after it.
    const double before = apex - static_cast<double>(left) * k / half_width;
    const double after = apex + static_cast<double>(right) * k / half_width;
    win.frames[half_width - k] = left == half_width ? frames[apex - k] : sample_at(frames, before);
    win.frames[half_width + k] = right == half_width ? frames[apex + k] : sample_at(frames, after);
  }
  return win;
}

FrameWindow window_for_clip(const data::Clip& clip, int size, int half_width) {
  const int apex = clip.apex();
  const int n = clip.frame_count();
  // Only the frames the window can touch need normalising.
  const int lo = std::max(0, apex - half_width);
  const int hi = std::min(n - 1, apex + half_width);
  std::vector<Image> frames;
  frames.reserve(hi - lo + 1);
  for (int i = lo; i <= hi; ++i) frames.push_back(normalize_frame(clip.frames[i], clip.bbox, size));
  return select_window(frames, apex - lo, half_width);
}

}  // namespace atnet::pre
