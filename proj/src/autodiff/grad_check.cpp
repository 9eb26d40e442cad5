#include "atnet/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atnet/common/error.hpp"

namespace atnet::ad {

GradCheckResult grad_check(Graph& graph, const Bindings& inputs, const GradCheckOptions& options) {
  if (!(options.step > 0.0 && options.step <= 1e-3)) {
    throw ConfigError("grad_check step must lie in (0, 1e-3]");
  }
  if (graph.forward(inputs).size() != 1) {
    throw ShapeError("grad_check needs a scalar output, got " + shape_string(graph.value(graph.output()).shape()));
  }
  const Gradients analytic = graph.backward();

  std::vector<std::string> names = options.variables;
  if (names.empty()) names = graph.variable_names(true);

  std::vector<NodeId> relus;
  if (options.skip_kink_crossings) {
    for (std::uint32_t i = 0; i < graph.size(); ++i)
      if (graph.op(NodeId{i}) == Op::Relu) relus.push_back(NodeId{i});
  }
  // Which ReLU units are active; an element whose +h and -h probes differ
  // here straddles a kink and its central difference is meaningless.
  auto active_pattern = [&] {
    std::vector<bool> bits;
    for (auto id : relus)
      for (double v : graph.value(id).values()) bits.push_back(v > 0.0);
    return bits;
  };

  Bindings probe = inputs;
  Rng rng(options.seed);
  GradCheckResult result;
  for (const auto& name : names) {
    auto grad_it = analytic.find(name);
    auto bind_it = probe.find(name);
    if (grad_it == analytic.end() || bind_it == probe.end()) {
      throw Error("grad_check: '" + name + "' is not a bound trainable variable");
    }
    Tensor& x = bind_it->second;
    std::vector<std::size_t> indices(x.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (options.max_elements_per_variable != 0 && indices.size() > options.max_elements_per_variable) {
      // partial Fisher-Yates
      for (std::size_t i = 0; i < options.max_elements_per_variable; ++i) {
        const auto j = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(i),
                                                            static_cast<std::int64_t>(indices.size() - 1)));
        std::swap(indices[i], indices[j]);
      }
      indices.resize(options.max_elements_per_variable);
      std::ranges::sort(indices);
    }
    for (auto idx : indices) {
      const double saved = x[idx];
      x[idx] = saved + options.step;
      const double plus = graph.forward(probe).item();
      const auto plus_pattern = active_pattern();
      x[idx] = saved - options.step;
      const double minus = graph.forward(probe).item();
      x[idx] = saved;
      if (!relus.empty() && active_pattern() != plus_pattern) {
        ++result.elements_skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = grad_it->second[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.elements_checked;
      if (rel > result.max_relative_error || result.worst_variable.empty()) {
        result.max_relative_error = std::max(rel, result.max_relative_error);
        if (rel >= result.max_relative_error) {
          result.worst_variable = name;
          result.worst_index = idx;
          result.worst_analytic = a;
          result.worst_numeric = numeric;
        }
      }
    }
  }
  // leave the graph holding the unperturbed forward
  graph.forward(inputs);
  return result;
}

}  // namespace atnet::ad
