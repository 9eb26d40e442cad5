#pragma once

#include <string>
#include <vector>

#include "atnet/common/grid.hpp"
#include "atnet/dataset/clip.hpp"

namespace atnet::train {

/// Everything the network needs from one clip: the normalised apex frame
/// for the spatial stream and the ADM matrix for the temporal stream.
struct Sample {
  std::string key;
  std::string subject_key;
  data::DatasetId dataset;
  data::Class3 label = data::Class3::Positive;
  Image apex;
  Grid adm;
};

/// Normalises each clip's apex frame to size x size and pairs it with the
/// clip's feature matrix (same order as `clips`).
std::vector<Sample> make_samples(const std::vector<data::Clip>& clips, const std::vector<Grid>& features, int size);

}  // namespace atnet::train
