#include "atnet/evaluation/splits.hpp"

#include <map>

#include "atnet/common/error.hpp"

namespace atnet::eval {

std::string to_string(Protocol p) { return p == Protocol::Cde ? "cde" : "hde"; }

Protocol parse_protocol(const std::string& text) {
  if (text == "cde" || text == "CDE") return Protocol::Cde;
  if (text == "hde" || text == "HDE") return Protocol::Hde;
  throw ConfigError("unknown protocol '" + text + "' (expected cde or hde)");
}

SplitPlan make_splits(const std::vector<train::Sample>& samples, Protocol protocol) {
  // Group key -> member indices. DatasetId sorts by kind then shard.
  std::map<std::string, std::vector<std::size_t>> groups;
  std::map<data::DatasetId, std::vector<std::size_t>> datasets;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    groups[samples[i].subject_key].push_back(i);
    datasets[samples[i].dataset].push_back(i);
  }

  SplitPlan plan;
  plan.protocol = protocol;
  auto add_fold = [&](const std::string& name, const std::vector<std::size_t>& test) {
    Fold f;
    f.held_out = name;
    f.test = test;
    std::vector<bool> in_test(samples.size(), false);
    for (auto i : test) in_test[i] = true;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (!in_test[i]) f.train.push_back(i);
    plan.folds.push_back(std::move(f));
  };

  if (protocol == Protocol::Cde) {
    if (groups.size() < 2) {
      throw DataError("CDE protocol needs at least 2 distinct subjects, found " + std::to_string(groups.size()));
    }
    for (const auto& [key, idx] : groups) add_fold(key, idx);
  } else {
    if (datasets.size() != 3) {
      throw DataError("HDE protocol needs exactly 3 datasets, found " + std::to_string(datasets.size()));
    }
    for (const auto& [id, idx] : datasets) add_fold(data::to_string(id), idx);
  }
  return plan;
}

}  // namespace atnet::eval
