#pragma once

#include <vector>

#include "atnet/common/grid.hpp"
#include "atnet/dataset/clip.hpp"

namespace atnet::pre {

struct FrameWindow {
  std::vector<Image> frames;
  int apex_position = 0;
  /// True when either side of the apex had to be resampled in time.
  bool interpolated = false;
};

/// Apex-centred window of 2 * half_width + 1 frames. Each side of the apex
/// is handled separately: if the clip provides half_width frames on that
/// side they are copied verbatim, otherwise the frames that exist between
/// the clip boundary and the apex are linearly resampled onto the
/// half_width slots. The apex always lands at position half_width.
FrameWindow select_window(const std::vector<Image>& frames, int apex, int half_width = 32);

/// Normalises the clip's frames to size x size and selects the window.
FrameWindow window_for_clip(const data::Clip& clip, int size, int half_width = 32);

}  // namespace atnet::pre
