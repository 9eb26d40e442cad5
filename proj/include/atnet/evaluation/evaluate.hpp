#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "atnet/evaluation/metrics.hpp"
#include "atnet/evaluation/splits.hpp"
#include "atnet/model/config.hpp"
#include "atnet/training/trainer.hpp"

namespace atnet::eval {

struct ScoredClip {
  std::string key;
  std::string dataset;
  data::Class3 label = data::Class3::Positive;
  data::Class3 predicted = data::Class3::Positive;

  friend bool operator==(const ScoredClip&, const ScoredClip&) = default;
};

struct FoldResult {
  std::string held_out;
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
  std::uint64_t params_checksum = 0;
  std::vector<ScoredClip> clips;
  ConfusionMatrix confusion;

  friend bool operator==(const FoldResult&, const FoldResult&) = default;
};

struct Metrics {
  long n = 0;
  double acc = 0;
  double uf1 = 0;
  double uar = 0;
};

Metrics metrics_of(const ConfusionMatrix& cm);

/// Results of one network variant under one protocol. Counts are pooled
/// over folds before any metric is computed; per-dataset matrices restrict
/// the pooled counts to test clips from that dataset.
struct StreamReport {
  model::StreamMode mode = model::StreamMode::Fusion;
  std::vector<FoldResult> folds;
  ConfusionMatrix pooled;
  std::vector<std::pair<std::string, ConfusionMatrix>> per_dataset;

  friend bool operator==(const StreamReport&, const StreamReport&) = default;
};

struct EvalReport {
  Protocol protocol = Protocol::Cde;
  std::string provenance;
  std::vector<StreamReport> streams;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Predicts one fold's test samples after fitting on its training samples.
using FoldPredictor = std::function<std::vector<data::Class3>(
    std::size_t fold, const std::vector<train::Sample>& train, const std::vector<train::Sample>& test,
    FoldResult& record)>;

/// Runs every fold through `predictor` (up to `jobs` folds at once) and
/// pools the results. Fold order in the report follows the plan.
StreamReport evaluate_with(const std::vector<train::Sample>& samples, const SplitPlan& plan,
                           const FoldPredictor& predictor, int jobs = 1);

/// Trains a fresh network per fold with seed config.seed + fold index and
/// predicts the held-out samples.
StreamReport evaluate(const std::vector<train::Sample>& samples, const SplitPlan& plan,
                      const train::TrainConfig& config, const model::ModelConfig& model_config,
                      model::StreamMode mode = model::StreamMode::Fusion, int jobs = 1);

}  // namespace atnet::eval
