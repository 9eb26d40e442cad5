#include "atnet/dataset/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "atnet/common/binary_io.hpp"
#include "atnet/common/error.hpp"
#include "atnet/dataset/labels.hpp"
#include "atnet/dataset/png_io.hpp"

namespace fs = std::filesystem;

namespace atnet::data {

namespace {

const std::vector<std::string> kHeader = {"dataset", "subject", "clip", "frames_dir", "apex", "label"};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

bool parse_int(const std::string& text, int& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::optional<BBox> parse_bbox(const std::string& text) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    int x = 0;
    if (!parse_int(trim(part), x)) return std::nullopt;
    v.push_back(x);
  }
  if (v.size() != 4) return std::nullopt;
  return BBox{v[0], v[1], v[2], v[3]};
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw DataError("unterminated quote in CSV line: " + line);
  fields.push_back(trim(cur));
  return fields;
}

std::string LoadReport::to_text() const {
  std::ostringstream out;
  out << "rows " << rows << "\n";
  out << "loaded " << loaded << "\n";
  out << "apex_defaulted " << apex_defaulted << "\n";
  out << "excluded " << excluded.size() << "\n";
  for (const auto& e : excluded) out << e.dataset << "," << e.clip_id << "," << e.raw_label << "\n";
  return out.str();
}

fs::path load_report_path(const fs::path& manifest) {
  auto p = manifest;
  p.replace_extension(".load_report.txt");
  return p;
}

ClipSet load_manifest(const fs::path& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());

  LoadReport local;
  ClipSet set;
  set.provenance = path.string();
  const auto base = path.parent_path();
  std::vector<std::string> problems;
  std::set<std::pair<DatasetId, std::string>> seen;

  std::string line;
  if (!std::getline(in, line)) throw DataError("manifest " + path.string() + " is empty");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  auto header = split_csv_line(line);
  bool has_bbox = false;
  if (header.size() == kHeader.size() + 1 && header.back() == "bbox") {
    has_bbox = true;
    header.pop_back();
  }
  if (header != kHeader) {
    throw DataError("manifest " + path.string() + ": header must be dataset,subject,clip,frames_dir,apex,label[,bbox]");
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++local.rows;
    const auto where = "line " + std::to_string(line_no);
    std::vector<std::string> f;
    try {
      f = split_csv_line(line);
    } catch (const DataError& e) {
      problems.push_back(where + ": " + e.what());
      continue;
    }
    if (f.size() != header.size() + (has_bbox ? 1 : 0)) {
      problems.push_back(where + ": expected " + std::to_string(header.size() + (has_bbox ? 1 : 0)) +
                         " fields, got " + std::to_string(f.size()));
      continue;
    }

    Clip clip;
    try {
      clip.dataset = parse_dataset(f[0]);
    } catch (const DataError& e) {
      problems.push_back(where + ": " + e.what());
      continue;
    }
    clip.subject_id = f[1];
    clip.clip_id = f[2];
    clip.raw_label = f[5];
    if (clip.subject_id.empty() || clip.clip_id.empty()) {
      problems.push_back(where + ": empty subject or clip id");
      continue;
    }
    if (!seen.insert({clip.dataset, clip.clip_id}).second) {
      problems.push_back(where + ": duplicate clip " + clip.key());
      continue;
    }

    const auto label = merge_labels(clip.raw_label, clip.dataset);
    if (!label) {
      local.excluded.push_back({to_string(clip.dataset), clip.clip_id, clip.raw_label});
      continue;
    }
    clip.label = *label;

    if (!f[4].empty()) {
      int apex = 0;
      if (!parse_int(f[4], apex)) {
        problems.push_back(where + ": apex '" + f[4] + "' is not an integer");
        continue;
      }
      clip.apex_index = apex;
    }
    if (has_bbox && !f[6].empty()) {
      clip.bbox = parse_bbox(f[6]);
      if (!clip.bbox) {
        problems.push_back(where + ": bbox '" + f[6] + "' must be x,y,w,h");
        continue;
      }
    }

    fs::path dir = f[3];
    if (dir.is_relative()) dir = base / dir;
    if (!fs::is_directory(dir)) {
      problems.push_back(where + ": frames directory " + dir.string() + " not found");
      continue;
    }
    try {
      for (const auto& file : list_frames(dir)) clip.frames.push_back(read_png(file));
      if (clip.frames.empty()) throw DataError("no PNG frames in " + dir.string());
      if (!clip.apex_index) {
        clip.apex_index = clip.frame_count() / 2;
        ++local.apex_defaulted;
      }
      clip.validate();
    } catch (const DataError& e) {
      problems.push_back(where + ": " + e.what());
      continue;
    }
    set.clips.push_back(std::move(clip));
  }

  if (!problems.empty()) {
    std::string msg = "manifest " + path.string() + " has " + std::to_string(problems.size()) + " bad row(s):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }
  local.loaded = set.clips.size();
  if (report) *report = std::move(local);
  return set;
}

fs::path write_manifest(const ClipSet& set, const fs::path& dir) {
  fs::create_directories(dir);
  const bool any_bbox = std::any_of(set.clips.begin(), set.clips.end(), [](const Clip& c) { return c.bbox.has_value(); });

  std::ostringstream out;
  for (std::size_t i = 0; i < kHeader.size(); ++i) out << (i ? "," : "") << kHeader[i];
  if (any_bbox) out << ",bbox";
  out << "\n";

  for (const auto& clip : set.clips) {
    const auto rel = fs::path("frames") / to_string(clip.dataset) / clip.clip_id;
    const auto frame_dir = dir / rel;
    fs::create_directories(frame_dir);
    const int digits = std::max<int>(4, static_cast<int>(std::to_string(clip.frames.size()).size()));
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
      auto name = std::to_string(i);
      name.insert(0, digits - name.size(), '0');
      write_png(frame_dir / (name + ".png"), clip.frames[i]);
    }
    out << csv_field(to_string(clip.dataset)) << "," << csv_field(clip.subject_id) << "," << csv_field(clip.clip_id)
        << "," << csv_field(rel.generic_string()) << ","
        << (clip.apex_index ? std::to_string(*clip.apex_index) : std::string()) << "," << csv_field(clip.raw_label);
    if (any_bbox) {
      if (clip.bbox) {
        const auto& b = *clip.bbox;
        out << ",\"" << b.x << "," << b.y << "," << b.w << "," << b.h << "\"";
      } else {
        out << ",";
      }
    }
    out << "\n";
  }
  const auto path = dir / "manifest.csv";
  write_file_atomic(path, out.str());
  return path;
}

}  // namespace atnet::data
