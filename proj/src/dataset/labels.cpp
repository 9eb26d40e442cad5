#include "atnet/dataset/labels.hpp"

#include <cctype>
#include <string>

namespace atnet::data {

std::optional<Class3> merge_labels(std::string_view raw_label, DatasetId dataset) {
  std::string label;
  for (char ch : raw_label) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      label.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  switch (dataset.kind) {
    case DatasetKind::Casme2:
    case DatasetKind::Samm:
      if (label == "happiness") return Class3::Positive;
      if (label == "anger" || label == "disgust" || label == "sadness" || label == "fear") return Class3::Negative;
      if (label == "surprise") return Class3::Surprise;
      return std::nullopt;
    case DatasetKind::Smic:
    case DatasetKind::Synth:
      if (label == "positive") return Class3::Positive;
      if (label == "negative") return Class3::Negative;
      if (label == "surprise") return Class3::Surprise;
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace atnet::data
