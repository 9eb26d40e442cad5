#include "atnet/dataset/clip.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "atnet/common/error.hpp"

namespace atnet::data {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

std::string to_string(DatasetId id) {
  switch (id.kind) {
    case DatasetKind::Casme2: return "CASME2";
    case DatasetKind::Samm: return "SAMM";
    case DatasetKind::Smic: return "SMIC";
    case DatasetKind::Synth:
      if (id.shard == 0) return "SYNTH";
      return std::string("SYNTH-") + static_cast<char>('A' + id.shard - 1);
  }
  return "?";
}

DatasetId parse_dataset(std::string_view text) {
  const auto u = upper(text);
  if (u == "CASME2" || u == "CASME II" || u == "CASMEII") return {DatasetKind::Casme2, 0};
  if (u == "SAMM") return {DatasetKind::Samm, 0};
  if (u == "SMIC") return {DatasetKind::Smic, 0};
  if (u == "SYNTH") return {DatasetKind::Synth, 0};
  if (u.size() == 7 && u.starts_with("SYNTH-") && u[6] >= 'A' && u[6] <= 'Z') {
    return {DatasetKind::Synth, u[6] - 'A' + 1};
  }
  throw DataError("unknown dataset '" + std::string(text) + "'");
}

std::string to_string(Class3 c) {
  switch (c) {
    case Class3::Positive: return "Positive";
    case Class3::Negative: return "Negative";
    case Class3::Surprise: return "Surprise";
  }
  return "?";
}

Class3 class_from_index(int index) {
  if (index < 0 || index >= kNumClasses) throw DataError("class index " + std::to_string(index) + " out of range");
  return static_cast<Class3>(index);
}

std::string Clip::subject_key() const { return to_string(dataset) + "/" + subject_id; }
std::string Clip::key() const { return to_string(dataset) + "/" + clip_id; }

int Clip::apex() const {
  if (!apex_index) throw DataError("clip " + key() + " has no apex index");
  return *apex_index;
}

void Clip::validate() const {
  if (frames.empty()) throw DataError("clip " + key() + " has no frames");
  const auto& f0 = frames.front();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.height != f0.height || f.width != f0.width || f.channels != f0.channels) {
      throw DataError("clip " + key() + ": frame " + std::to_string(i) + " has different dimensions");
    }
    if (f.pixels.size() != static_cast<std::size_t>(f.height) * f.width * f.channels) {
      throw DataError("clip " + key() + ": frame " + std::to_string(i) + " pixel buffer size mismatch");
    }
  }
  if (apex_index && (*apex_index < 0 || *apex_index >= frame_count())) {
    throw DataError("clip " + key() + ": apex " + std::to_string(*apex_index) + " outside [0, " +
                    std::to_string(frame_count()) + ")");
  }
  if (bbox && (bbox->w <= 0 || bbox->h <= 0 || bbox->x < 0 || bbox->y < 0 ||
               bbox->x + bbox->w > f0.width || bbox->y + bbox->h > f0.height)) {
    throw DataError("clip " + key() + ": bounding box outside the frame or empty");
  }
}

void ClipSet::validate() const {
  std::set<std::string> seen;
  std::vector<std::string> dupes;
  for (const auto& c : clips) {
    c.validate();
    if (!seen.insert(c.key()).second) dupes.push_back(c.key());
  }
  if (!dupes.empty()) {
    std::string msg = "duplicate (dataset, clip) ids:";
    for (const auto& d : dupes) msg += " " + d;
    throw DataError(msg);
  }
}

}  // namespace atnet::data
