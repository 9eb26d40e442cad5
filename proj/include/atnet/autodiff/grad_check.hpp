#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "atnet/autodiff/graph.hpp"

namespace atnet::ad {

struct GradCheckOptions {
  double step = 1e-6;
  /// 0 checks every element; otherwise a seeded random subset per variable.
  std::size_t max_elements_per_variable = 0;
  std::uint64_t seed = 0;
  /// Restrict to these variables; empty means every trainable variable.
  std::vector<std::string> variables;
  /// Skip elements whose two probes put some ReLU on different sides of
  /// zero. Needed for deep ReLU networks, where a shift of one batch-norm
  /// offset moves thousands of units and some always straddle the kink.
  bool skip_kink_crossings = false;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_variable;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t elements_checked = 0;
  std::size_t elements_skipped = 0;
};

/// Compares reverse-mode gradients against central differences.
/// Relative error per element is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(Graph& graph, const Bindings& inputs, const GradCheckOptions& options = {});

}  // namespace atnet::ad
