#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atnet/autodiff/graph.hpp"
#include "atnet/common/grid.hpp"
#include "atnet/common/random.hpp"
#include "atnet/dataset/clip.hpp"
#include "atnet/model/params.hpp"

namespace atnet::model {

struct Prediction {
  std::vector<double> logits;
  std::vector<double> probabilities;
  data::Class3 predicted = data::Class3::Positive;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Stacked network inputs for a batch of N samples.
struct BatchInputs {
  ad::Tensor apex;  // [N, 1, S, S]
  ad::Tensor adm;   // [N, steps, input_dim]
  std::vector<int> labels;

  std::size_t size() const { return apex.rank() ? apex.dim(0) : adm.dim(0); }
};

/// Packs images and feature matrices into batch tensors. Either list may
/// be empty when the corresponding stream is unused.
BatchInputs make_batch(const std::vector<const Image*>& apex, const std::vector<const Grid*>& adm,
                       std::vector<int> labels = {});

inline constexpr const char* kApexInput = "input.apex";
inline constexpr const char* kAdmInput = "input.adm";

/// The whole network laid out as one autodiff graph for a fixed batch size.
struct NetworkGraph {
  ad::Graph graph;
  std::optional<ad::NodeId> spatial_embedding;
  std::optional<ad::NodeId> temporal_embedding;
  ad::NodeId logits;
  ad::NodeId probabilities;
  std::optional<ad::NodeId> loss;
  /// Batch-norm nodes keyed by their parameter prefix, for running-stat updates.
  std::vector<std::pair<std::string, ad::NodeId>> batch_norms;

  /// Parameter tensors plus the batch inputs, keyed by variable name.
  ad::Bindings bindings(const ModelParams& params, const BatchInputs& batch) const;
};

/// Builds the network graph. With labels, the root is the mean softmax
/// cross-entropy; otherwise it is the probability matrix. Dropout masks are
/// drawn from `dropout_rng` in train mode (it may be null in eval mode).
NetworkGraph build_network(const ModelParams& params, std::size_t batch, ad::Mode mode, Rng* dropout_rng,
                           const std::vector<int>* labels = nullptr);

/// After a train-mode forward, folds the batch statistics into the running
/// averages: running = m * running + (1 - m) * batch.
void update_running_stats(ModelParams& params, const NetworkGraph& net);

/// Single-sample stream outputs, length D.
std::vector<double> spatial_forward(const Image& apex, const ModelParams& params, ad::Mode mode);
std::vector<double> temporal_forward(const Grid& feature, const ModelParams& params, ad::Mode mode);

/// v / |v|, or v unchanged when |v| < 1e-12.
std::vector<double> l2_normalize(const std::vector<double>& v);

/// Fusion head on precomputed stream embeddings: normalise both,
/// concatenate, dropout (train mode only), linear, softmax.
Prediction fuse_classify(const std::vector<double>& spatial_emb, const std::vector<double>& temporal_emb,
                         const ModelParams& params, ad::Mode mode, Rng* rng = nullptr);

/// Eval-mode predictions for a batch.
std::vector<Prediction> predict(const ModelParams& params, const BatchInputs& batch);

}  // namespace atnet::model
