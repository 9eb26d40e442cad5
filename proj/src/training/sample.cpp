#include "atnet/training/sample.hpp"

#include "atnet/common/error.hpp"
#include "atnet/preprocess/frame.hpp"

namespace atnet::train {

std::vector<Sample> make_samples(const std::vector<data::Clip>& clips, const std::vector<Grid>& features, int size) {
  if (clips.size() != features.size()) throw DataError("make_samples: clip and feature counts differ");
  std::vector<Sample> out;
  out.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto& c = clips[i];
    Sample s;
    s.key = c.key();
    s.subject_key = c.subject_key();
    s.dataset = c.dataset;
    s.label = c.label;
    s.apex = pre::normalize_frame(c.frames.at(c.apex()), c.bbox, size);
    s.adm = features[i];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace atnet::train
