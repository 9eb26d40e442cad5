#pragma once

#include <string>
#include <vector>

#include "atnet/training/sample.hpp"

namespace atnet::eval {

enum class Protocol { Cde, Hde };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& text);

struct Fold {
  /// Subject key (CDE) or dataset name (HDE) held out in this fold.
  std::string held_out;
  /// Indices into the sample list the plan was made from.
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct SplitPlan {
  Protocol protocol = Protocol::Cde;
  std::vector<Fold> folds;
};

/// CDE: leave-one-subject-out over dataset-qualified subjects, folds in
/// sorted subject-key order. HDE: one fold per dataset, which must number
/// exactly three, in sorted dataset order.
SplitPlan make_splits(const std::vector<train::Sample>& samples, Protocol protocol);

}  // namespace atnet::eval
