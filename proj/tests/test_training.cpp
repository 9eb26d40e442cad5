#include <algorithm>
#include <cmath>

#include "atnet/common/error.hpp"
#include "atnet/dataset/synth.hpp"
#include "atnet/training/sgd.hpp"
#include "atnet/training/trainer.hpp"
#include "doctest.h"

using namespace atnet;
using namespace atnet::train;
using model::StreamMode;

namespace {

model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.embed_dim = 6;
  c.spatial.input_size = 8;
  c.spatial.widths = {4, 4};
  c.spatial.strides = {1, 2};
  c.temporal.hidden = 6;
  c.temporal.steps = 4;
  c.temporal.input_dim = 4;
  return c;
}

// Class k puts a bright square in column band k and a feature spike in column k.
std::vector<Sample> toy_samples(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i) {
    Sample s;
    const int k = i % 3;
    s.key = "T/" + std::to_string(i);
    s.subject_key = "T/s" + std::to_string(i % 4);
    s.label = data::class_from_index(k);
    s.apex = Image(8, 8);
    for (auto& v : s.apex.values()) v = uniform(rng, 0.0, 0.3);
    for (int r = 2; r < 6; ++r)
      for (int c = 0; c < 2; ++c) s.apex(r, 3 * k + c) = 0.9;
    s.adm = Grid(4, 4);
    for (auto& v : s.adm.values()) v = uniform(rng, -0.1, 0.1);
    for (int r = 0; r < 4; ++r) s.adm(r, k) += 1.0;
    out.push_back(std::move(s));
  }
  return out;
}

TrainConfig quick_config(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 4;
  c.initial_lr = 0.05;
  c.decay_every = 100;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("learning rate steps down by ten every ten epochs") {
  TrainConfig c;
  CHECK(lr_schedule(0, c) == 0.01);
  CHECK(lr_schedule(9, c) == 0.01);
  CHECK(lr_schedule(10, c) == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(lr_schedule(49, c) == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK_THROWS_AS(lr_schedule(50, c), ConfigError);
  CHECK_THROWS_AS(lr_schedule(-1, c), ConfigError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.momentum = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("cross entropy from probabilities and logits agree") {
  std::vector<double> z{1.0, -2.0, 0.5};
  double m = std::exp(1.0) + std::exp(-2.0) + std::exp(0.5);
  std::vector<double> p{std::exp(1.0) / m, std::exp(-2.0) / m, std::exp(0.5) / m};
  CHECK(cross_entropy(p, data::Class3::Surprise) == doctest::Approx(-std::log(p[2])));
  CHECK(cross_entropy_logits(z, data::Class3::Negative) == doctest::Approx(-std::log(p[1])).epsilon(1e-13));
  CHECK(cross_entropy_logits({1000.0, 0.0, 0.0}, data::Class3::Positive) == doctest::Approx(0.0));
}

TEST_CASE("sgd with zero gradient scales weights by one minus lr times decay") {
  auto p = model::init_params(tiny_config(), StreamMode::Temporal, 1);
  const auto before = p;
  ad::Gradients g;
  for (const auto& s : p.specs)
    if (s.trainable()) g.emplace(s.name, ad::Tensor(s.shape));
  Sgd sgd(0.9, 5e-4);
  sgd.step(p, g, 0.1);
  const double factor = 1.0 - 0.1 * 5e-4;
  for (const auto& s : p.specs) {
    const auto& a = before.at(s.name);
    const auto& b = p.at(s.name);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == a[i] * factor);
  }
}

TEST_CASE("sgd momentum accumulates velocity") {
  auto p = model::init_params(tiny_config(), StreamMode::Temporal, 1);
  const double w0 = p.at("head.bias")[0];
  ad::Gradients g;
  ad::Tensor grad({3});
  grad[0] = 1.0;
  g.emplace("head.bias", grad);
  Sgd sgd(0.5, 0.0);
  sgd.step(p, g, 0.1);
  CHECK(p.at("head.bias")[0] == doctest::Approx(w0 - 0.1));
  sgd.step(p, g, 0.1);
  CHECK(p.at("head.bias")[0] == doctest::Approx(w0 - 0.1 - 0.15));
  CHECK(sgd.velocity().at("head.bias")[0] == 1.5);
}

TEST_CASE("zero learning rate and decay leaves parameters unchanged") {
  auto p = model::init_params(tiny_config(), StreamMode::Fusion, 2);
  const auto before = p;
  ad::Gradients g;
  for (const auto& s : p.specs)
    if (s.trainable()) g.emplace(s.name, ad::Tensor(s.shape, std::vector<double>(p.at(s.name).size(), 0.7)));
  Sgd(0.9, 0.0).step(p, g, 0.0);
  CHECK(p == before);
}

TEST_CASE("training reduces the loss on a separable toy set") {
  auto samples = toy_samples(24, 1);
  for (auto mode : {StreamMode::Fusion, StreamMode::Spatial, StreamMode::Temporal}) {
    auto cfg = quick_config(40);
    cfg.initial_lr = 0.01;
    // a 6-wide embedding does not survive 50% dropout
    auto mc = tiny_config();
    mc.dropout_p = 0.0;
    auto r = train::train(samples, cfg, mc, mode);
    REQUIRE(r.history.epochs.size() == 40);
    CHECK(r.history.epochs.back().loss < r.history.epochs.front().loss);
    auto preds = predict_samples(r.params, samples);
    int correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) correct += preds[i].predicted == samples[i].label;
    CHECK(correct >= 20);
  }
}

TEST_CASE("training is deterministic in the seed") {
  auto samples = toy_samples(12, 2);
  auto a = train::train(samples, quick_config(3), tiny_config(), StreamMode::Fusion);
  auto b = train::train(samples, quick_config(3), tiny_config(), StreamMode::Fusion);
  CHECK(a.params == b.params);
  CHECK(a.history.to_csv() == b.history.to_csv());
  auto cfg = quick_config(3);
  cfg.seed = 4;
  auto c = train::train(samples, cfg, tiny_config(), StreamMode::Fusion);
  CHECK_FALSE(c.params == a.params);
}

TEST_CASE("history csv lists every epoch") {
  auto r = train::train(toy_samples(6, 3), quick_config(2), tiny_config(), StreamMode::Temporal);
  const auto csv = r.history.to_csv();
  CHECK(csv.starts_with("epoch,lr,loss,acc\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(r.history.params_checksum == r.params.checksum());
}

TEST_CASE("epoch callback sees the schedule") {
  std::vector<double> lrs;
  auto cfg = quick_config(3);
  cfg.decay_every = 1;
  train::train(toy_samples(6, 4), cfg, tiny_config(), StreamMode::Temporal, [&](const EpochStats& e) { lrs.push_back(e.lr); });
  REQUIRE(lrs.size() == 3);
  CHECK(lrs[0] == 0.05);
  CHECK(lrs[1] == doctest::Approx(0.005));
}

TEST_CASE("non-finite inputs stop training with a numerical error") {
  auto samples = toy_samples(6, 5);
  samples[2].adm(0, 0) = std::nan("");
  CHECK_THROWS_AS(train::train(samples, quick_config(1), tiny_config(), StreamMode::Temporal), NumericalError);
}

TEST_CASE("empty training set is rejected") {
  CHECK_THROWS(train::train({}, quick_config(1), tiny_config(), StreamMode::Fusion));
}

TEST_CASE("samples pair apex frames with features") {
  data::SynthConfig sc;
  sc.subjects = 3;
  sc.clips_per_subject = 3;
  auto set = data::synth_generate(sc, 1);
  std::vector<Grid> feats(set.size(), Grid(64, 128));
  auto samples = make_samples(set.clips, feats, 16);
  REQUIRE(samples.size() == 9);
  CHECK(samples[0].apex.rows() == 16);
  CHECK(samples[4].key == set.clips[4].key());
  CHECK(samples[4].subject_key == set.clips[4].subject_key());
  CHECK_THROWS(make_samples(set.clips, std::vector<Grid>(2), 16));
}
