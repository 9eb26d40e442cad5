#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "atnet/dataset/clip.hpp"

namespace atnet::data {

struct ExcludedClip {
  std::string dataset;
  std::string clip_id;
  std::string raw_label;
};

struct LoadReport {
  std::size_t rows = 0;
  std::size_t loaded = 0;
  std::size_t apex_defaulted = 0;
  std::vector<ExcludedClip> excluded;

  std::string to_text() const;
};

/// Reads a manifest CSV with header
///   dataset,subject,clip,frames_dir,apex,label[,bbox]
/// and loads every clip whose label maps onto a class. An empty apex means
/// "middle frame" (floor(n/2)). frames_dir is resolved relative to the
/// manifest's directory and must contain the clip's PNG frames, which are
/// ordered by file name.
///
/// Malformed rows, missing frames and duplicate clips are collected and
/// reported together in a single DataError.
ClipSet load_manifest(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Path of the load report that accompanies a manifest.
std::filesystem::path load_report_path(const std::filesystem::path& manifest);

/// Writes every clip's frames as PNGs under `dir`/frames/<dataset>/<clip>/
/// and a manifest at `dir`/manifest.csv. Returns the manifest path.
std::filesystem::path write_manifest(const ClipSet& set, const std::filesystem::path& dir);

/// Splits one CSV line into fields (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace atnet::data
