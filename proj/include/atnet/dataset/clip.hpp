#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atnet::data {

enum class DatasetKind : std::uint8_t { Casme2, Samm, Smic, Synth };

/// Source database of a clip. Synthetic data may be split into pseudo
/// datasets (shards) so the holdout-database protocol has something to
/// hold out; shard 0 of SYNTH prints as "SYNTH", shards 1.. as "SYNTH-A"...
struct DatasetId {
  DatasetKind kind = DatasetKind::Synth;
  int shard = 0;

  friend auto operator<=>(const DatasetId&, const DatasetId&) = default;
};

std::string to_string(DatasetId id);
/// Accepts CASME2 (also "CASME II"), SAMM, SMIC, SYNTH, SYNTH-<letter>.
DatasetId parse_dataset(std::string_view text);

enum class Class3 : std::uint8_t { Positive = 0, Negative = 1, Surprise = 2 };
inline constexpr int kNumClasses = 3;

std::string to_string(Class3 c);
Class3 class_from_index(int index);
inline int index_of(Class3 c) { return static_cast<int>(c); }

/// 8-bit image, row-major, 1 (gray) or 3 (RGB) interleaved channels.
struct Frame {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int r, int c, int ch = 0) const {
    return pixels[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  friend bool operator==(const Frame&, const Frame&) = default;
};

struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Clip {
  DatasetId dataset;
  std::string subject_id;
  std::string clip_id;
  std::vector<Frame> frames;
  std::optional<int> apex_index;
  std::string raw_label;
  Class3 label = Class3::Positive;
  std::optional<BBox> bbox;

  /// Dataset-qualified subject, e.g. "SMIC/1". Subjects from different
  /// datasets never share a key.
  std::string subject_key() const;
  /// Dataset-qualified clip id, unique within a ClipSet.
  std::string key() const;
  int frame_count() const { return static_cast<int>(frames.size()); }
  int apex() const;

  /// Throws DataError if frames are empty or non-uniform, or the apex
  /// lies outside the clip.
  void validate() const;

  friend bool operator==(const Clip&, const Clip&) = default;
};

struct ClipSet {
  std::vector<Clip> clips;
  std::string provenance;

  /// Checks every clip and (dataset, clip_id) uniqueness.
  void validate() const;
  std::size_t size() const { return clips.size(); }
};

}  // namespace atnet::data
