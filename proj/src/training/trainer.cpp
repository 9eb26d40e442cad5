#include "atnet/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "atnet/common/error.hpp"
#include "atnet/training/sgd.hpp"

namespace atnet::train {

namespace {

model::BatchInputs gather(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx,
                          model::StreamMode mode, std::vector<Image>* augmented) {
  std::vector<const Image*> apex;
  std::vector<const Grid*> adm;
  std::vector<int> labels;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& s = samples[idx[k]];
    if (mode != model::StreamMode::Temporal) apex.push_back(augmented ? &(*augmented)[k] : &s.apex);
    if (mode != model::StreamMode::Spatial) adm.push_back(&s.adm);
    labels.push_back(data::index_of(s.label));
  }
  return model::make_batch(apex, adm, std::move(labels));
}

}  // namespace

void TrainConfig::validate() const {
  if (!(initial_lr > 0)) throw ConfigError("train: initial_lr must be > 0");
  if (!(lr_decay > 0)) throw ConfigError("train: lr_decay must be > 0");
  if (decay_every < 1) throw ConfigError("train: decay_every must be >= 1");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (!(momentum >= 0 && momentum < 1)) throw ConfigError("train: momentum must be in [0, 1)");
  if (!(weight_decay >= 0)) throw ConfigError("train: weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  augment.validate();
}

double lr_schedule(int epoch, const TrainConfig& config) {
  if (epoch < 0 || epoch >= config.epochs) {
    throw ConfigError("lr_schedule: epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(config.epochs) +
                      ")");
  }
  return config.initial_lr * std::pow(config.lr_decay, epoch / config.decay_every);
}

double cross_entropy(const std::vector<double>& probabilities, data::Class3 label) {
  return -std::log(probabilities.at(data::index_of(label)));
}

double cross_entropy_logits(const std::vector<double>& logits, data::Class3 label) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0;
  for (double z : logits) s += std::exp(z - m);
  return m + std::log(s) - logits.at(data::index_of(label));
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out << "epoch,lr,loss,acc\n" << std::setprecision(17);
  for (const auto& e : epochs) out << e.epoch << "," << e.lr << "," << e.loss << "," << e.accuracy << "\n";
  return out.str();
}

TrainResult train(const std::vector<Sample>& samples, const TrainConfig& config, const model::ModelConfig& model_config,
                  model::StreamMode mode, const EpochCallback& on_epoch) {
  config.validate();
  if (samples.empty()) throw DataError("train: empty training set");

  TrainResult result;
  result.params = model::init_params(model_config, mode, derive_seed(config.seed, 1));
  auto& params = result.params;
  Rng shuffle_rng(derive_seed(config.seed, 2));
  Rng augment_rng(derive_seed(config.seed, 3));
  Rng dropout_rng(derive_seed(config.seed, 4));
  Sgd sgd(config.momentum, config.weight_decay);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const bool uses_apex = mode != model::StreamMode::Temporal;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(shuffle_rng, 0, static_cast<std::int64_t>(i - 1)));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::vector<std::size_t> idx(order.begin() + start,
                                         order.begin() + std::min(order.size(), start + config.batch_size));
      std::vector<Image> augmented;
      if (uses_apex) {
        for (auto i : idx) augmented.push_back(pre::augment(samples[i].apex, config.augment, augment_rng));
      }
      const auto batch = gather(samples, idx, mode, uses_apex ? &augmented : nullptr);

      auto net = model::build_network(params, idx.size(), ad::Mode::Train, &dropout_rng, &batch.labels);
      const double loss = net.graph.forward(net.bindings(params, batch)).item();
      if (!std::isfinite(loss)) {
        throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " +
                             std::to_string(start) + " (lr " + std::to_string(lr) + ")");
      }
      const auto grads = net.graph.backward();
      for (const auto& [name, g] : grads) {
        if (!g.all_finite()) throw NumericalError("train: non-finite gradient for " + name + " at epoch " + std::to_string(epoch));
      }
      model::update_running_stats(params, net);
      sgd.step(params, grads, lr);

      loss_sum += loss * static_cast<double>(idx.size());
      const auto& probs = net.graph.value(net.probabilities).values();
      const int classes = model_config.classes;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto* row = &probs[k * classes];
        const auto pred = std::max_element(row, row + classes) - row;
        if (pred == batch.labels[k]) ++correct;
      }
    }

    EpochStats stats{epoch, lr, loss_sum / static_cast<double>(samples.size()),
                     static_cast<double>(correct) / static_cast<double>(samples.size())};
    result.history.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  result.history.params_checksum = params.checksum();
  return result;
}

std::vector<model::Prediction> predict_samples(const model::ModelParams& params, const std::vector<Sample>& samples,
                                               int batch_size) {
  if (batch_size < 1) throw ConfigError("predict: batch_size must be >= 1");
  std::vector<model::Prediction> out;
  out.reserve(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(samples.size(), start + batch_size); ++i) idx.push_back(i);
    const auto batch = gather(samples, idx, params.mode, nullptr);
    for (auto& p : model::predict(params, batch)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace atnet::train
