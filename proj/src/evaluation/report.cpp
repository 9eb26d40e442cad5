#include "atnet/evaluation/report.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "atnet/common/error.hpp"

namespace atnet::eval {

namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const ConfusionMatrix& cm) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : cm.counts) rows.push_back(ordered_json(row));
  return rows;
}

ConfusionMatrix matrix_from(const ordered_json& j) {
  ConfusionMatrix cm;
  if (!j.is_array() || j.size() != data::kNumClasses) throw DataError("report: confusion matrix must be 3x3");
  for (int r = 0; r < data::kNumClasses; ++r) {
    if (!j[r].is_array() || j[r].size() != data::kNumClasses) throw DataError("report: confusion matrix must be 3x3");
    for (int c = 0; c < data::kNumClasses; ++c) {
      cm.counts[r][c] = j[r][c].get<long>();
      if (cm.counts[r][c] < 0) throw DataError("report: negative count in confusion matrix");
    }
  }
  return cm;
}

ordered_json metrics_json(const ConfusionMatrix& cm) {
  const auto m = metrics_of(cm);
  ordered_json j;
  j["n"] = m.n;
  j["acc"] = m.acc;
  j["uf1"] = m.uf1;
  j["uar"] = m.uar;
  j["confusion"] = matrix_json(cm);
  return j;
}

data::Class3 class_named(const std::string& s) {
  for (int k = 0; k < data::kNumClasses; ++k)
    if (data::to_string(data::class_from_index(k)) == s) return data::class_from_index(k);
  throw DataError("report: unknown class '" + s + "'");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string stream_title(model::StreamMode m) {
  switch (m) {
    case model::StreamMode::Spatial: return "Spatial Stream";
    case model::StreamMode::Temporal: return "Temporal Stream";
    case model::StreamMode::Fusion: return "Fusion";
  }
  return "?";
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  ordered_json root;
  root["protocol"] = to_string(report.protocol);
  root["provenance"] = report.provenance;
  root["classes"] = {"Positive", "Negative", "Surprise"};
  root["confusion_layout"] = "rows = true class, columns = predicted class";
  ordered_json streams = ordered_json::array();
  for (const auto& s : report.streams) {
    ordered_json js;
    js["stream"] = model::to_string(s.mode);
    js["pooled"] = metrics_json(s.pooled);
    ordered_json per = ordered_json::array();
    for (const auto& [name, cm] : s.per_dataset) {
      auto j = metrics_json(cm);
      j["dataset"] = name;
      per.push_back(j);
    }
    js["per_dataset"] = per;
    ordered_json folds = ordered_json::array();
    for (const auto& f : s.folds) {
      ordered_json jf;
      jf["held_out"] = f.held_out;
      jf["train_size"] = f.train_size;
      jf["seed"] = f.seed;
      jf["params_checksum"] = hex64(f.params_checksum);
      jf["confusion"] = matrix_json(f.confusion);
      ordered_json clips = ordered_json::array();
      for (const auto& c : f.clips) {
        clips.push_back({{"clip", c.key},
                         {"dataset", c.dataset},
                         {"label", data::to_string(c.label)},
                         {"predicted", data::to_string(c.predicted)}});
      }
      jf["clips"] = clips;
      folds.push_back(jf);
    }
    js["folds"] = folds;
    streams.push_back(js);
  }
  root["streams"] = streams;
  return root.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  EvalReport report;
  try {
    const auto root = ordered_json::parse(text);
    report.protocol = parse_protocol(root.at("protocol").get<std::string>());
    report.provenance = root.value("provenance", "");
    for (const auto& js : root.at("streams")) {
      StreamReport s;
      s.mode = model::parse_stream_mode(js.at("stream").get<std::string>());
      s.pooled = matrix_from(js.at("pooled").at("confusion"));
      for (const auto& jd : js.at("per_dataset")) {
        s.per_dataset.emplace_back(jd.at("dataset").get<std::string>(), matrix_from(jd.at("confusion")));
      }
      for (const auto& jf : js.at("folds")) {
        FoldResult f;
        f.held_out = jf.at("held_out").get<std::string>();
        f.train_size = jf.at("train_size").get<std::size_t>();
        f.seed = jf.at("seed").get<std::uint64_t>();
        f.params_checksum = std::stoull(jf.at("params_checksum").get<std::string>(), nullptr, 16);
        f.confusion = matrix_from(jf.at("confusion"));
        for (const auto& jc : jf.at("clips")) {
          f.clips.push_back({jc.at("clip").get<std::string>(), jc.at("dataset").get<std::string>(),
                             class_named(jc.at("label").get<std::string>()),
                             class_named(jc.at("predicted").get<std::string>())});
        }
        s.folds.push_back(std::move(f));
      }
      report.streams.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: malformed JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return report;
}

std::string render_table(const EvalReport& report) {
  std::ostringstream out;
  const int name_w = 18, num_w = 7;
  const bool cde = report.protocol == Protocol::Cde;
  out << (cde ? "RESULTS FOR CDE VALIDATION" : "RESULTS FOR HDE VALIDATION") << "\n";
  if (report.streams.empty()) return out.str();

  // Column groups come from the first stream; all streams share the splits.
  const auto& first = report.streams.front();
  std::vector<std::pair<std::string, long>> groups;
  if (cde) groups.emplace_back("Full", first.pooled.total());
  if (cde) {
    for (const auto& [name, cm] : first.per_dataset) groups.emplace_back(name, cm.total());
  } else {
    for (const auto& f : first.folds) groups.emplace_back(f.held_out, f.confusion.total());
  }
  const int per_group = cde ? 3 : 2;
  const int group_w = per_group * num_w;

  out << std::left << std::setw(name_w) << (cde ? "" : "Testing set:");
  for (const auto& [name, n] : groups) {
    out << std::left << std::setw(group_w) << (name + " (" + std::to_string(n) + ")");
  }
  out << "\n" << std::left << std::setw(name_w) << "Method";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (cde) out << std::left << std::setw(num_w) << "Acc";
    out << std::left << std::setw(num_w) << "UF1" << std::setw(num_w) << "UAR";
  }
  out << "\n";

  for (const auto& s : report.streams) {
    out << std::left << std::setw(name_w) << stream_title(s.mode);
    std::vector<ConfusionMatrix> cols;
    if (cde) {
      cols.push_back(s.pooled);
      for (const auto& [name, cm] : s.per_dataset) cols.push_back(cm);
    } else {
      for (const auto& f : s.folds) cols.push_back(f.confusion);
    }
    for (const auto& cm : cols) {
      const auto m = metrics_of(cm);
      if (cde) out << std::left << std::setw(num_w) << fmt(m.acc);
      out << std::left << std::setw(num_w) << fmt(m.uf1) << std::setw(num_w) << fmt(m.uar);
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace atnet::eval
