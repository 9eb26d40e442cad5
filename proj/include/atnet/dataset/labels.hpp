#pragma once

#include <optional>
#include <string_view>

#include "atnet/dataset/clip.hpp"

namespace atnet::data {

/// Maps a database-specific emotion label onto the three shared classes.
/// CASME II / SAMM: Happiness -> Positive; Anger, Disgust, Sadness, Fear ->
/// Negative; Surprise -> Surprise. SMIC and synthetic data already use
/// Positive / Negative / Surprise. Everything else (others, repression,
/// contempt, ...) is excluded and yields nullopt. Case-insensitive.
std::optional<Class3> merge_labels(std::string_view raw_label, DatasetId dataset);

}  // namespace atnet::data
