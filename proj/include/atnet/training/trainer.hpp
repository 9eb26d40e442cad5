#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "atnet/dataset/clip.hpp"
#include "atnet/model/atnet.hpp"
#include "atnet/preprocess/augment.hpp"
#include "atnet/training/sample.hpp"

namespace atnet::train {

struct TrainConfig {
  double initial_lr = 0.01;
  double lr_decay = 0.1;
  int decay_every = 10;
  int epochs = 50;
  double momentum = 0.9;
  double weight_decay = 5e-6;
  int batch_size = 16;
  std::uint64_t seed = 0;
  pre::AugmentParams augment = pre::AugmentParams::for_size(32);

  void validate() const;
};

/// initial_lr * lr_decay^floor(epoch / decay_every).
double lr_schedule(int epoch, const TrainConfig& config);

/// -log p[label] for a probability vector.
double cross_entropy(const std::vector<double>& probabilities, data::Class3 label);
/// The same loss from logits, via the stable log-sum-exp form.
double cross_entropy_logits(const std::vector<double>& logits, data::Class3 label);

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::uint64_t params_checksum = 0;

  /// "epoch,lr,loss,acc" with values printed to full precision.
  std::string to_csv() const;
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  model::ModelParams params;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Trains a fresh network on `samples`. Mini-batches are reshuffled every
/// epoch; apex images are augmented, feature matrices are not. Training
/// accuracy is measured on the train-mode forward pass of each batch.
/// Everything random derives from config.seed.
TrainResult train(const std::vector<Sample>& samples, const TrainConfig& config, const model::ModelConfig& model_config,
                  model::StreamMode mode = model::StreamMode::Fusion, const EpochCallback& on_epoch = {});

/// Eval-mode predictions, processed in chunks of `batch_size`.
std::vector<model::Prediction> predict_samples(const model::ModelParams& params, const std::vector<Sample>& samples,
                                               int batch_size = 16);

}  // namespace atnet::train
