#pragma once

#include <string>

#include "atnet/evaluation/evaluate.hpp"

namespace atnet::eval {

/// JSON document with every fold's confusion matrix and per-clip
/// predictions plus the pooled metrics. Stable key order, no timestamps.
std::string report_to_json(const EvalReport& report);
/// Inverse of report_to_json. Metrics are recomputed from the stored
/// confusion matrices, not trusted from the file.
EvalReport report_from_json(const std::string& text);

/// Fixed-width table. CDE: one row per stream, Acc/UF1/UAR for the full set
/// and for each source dataset. HDE: one row per stream, UF1/UAR for each
/// held-out dataset.
std::string render_table(const EvalReport& report);

}  // namespace atnet::eval
