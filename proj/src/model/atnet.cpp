#include "atnet/model/atnet.hpp"

#include <algorithm>
#include <cmath>

#include "atnet/common/error.hpp"

namespace atnet::model {

namespace {

using ad::Graph;
using ad::Mode;
using ad::NodeId;
using ad::Tensor;

struct Builder {
  const ModelParams& params;
  Graph& g;
  Mode mode;
  std::vector<std::pair<std::string, NodeId>>& bns;

  NodeId var(const std::string& name) {
    const auto& spec_shape = params.at(name).shape();
    return g.variable(name, spec_shape);
  }

  NodeId bn(NodeId x, const std::string& prefix) {
    auto node = g.batch_norm(x, var(prefix + ".gamma"), var(prefix + ".beta"), mode,
                             params.at(prefix + ".running_mean"), params.at(prefix + ".running_var"));
    bns.emplace_back(prefix, node);
    return node;
  }

  NodeId conv_bn(NodeId x, const std::string& conv, const std::string& norm, int stride) {
    const int k = static_cast<int>(params.at(conv).dim(2));
    return bn(g.conv2d(x, var(conv), stride, k / 2), norm);
  }

  NodeId spatial(NodeId x) {
    const auto& s = params.config.spatial;
    NodeId h = g.relu(conv_bn(x, "spatial.stem.conv", "spatial.stem.bn", s.stem_stride));
    int in = s.widths[0];
    for (std::size_t st = 0; st < s.widths.size(); ++st) {
      for (int b = 0; b < s.blocks_per_stage; ++b) {
        const int stride = b == 0 ? s.strides[st] : 1;
        const auto p = "spatial.s" + std::to_string(st + 1) + ".b" + std::to_string(b + 1);
        NodeId y = g.relu(conv_bn(h, p + ".conv1", p + ".bn1", stride));
        y = conv_bn(y, p + ".conv2", p + ".bn2", 1);
        NodeId skip = h;
        if (stride != 1 || in != s.widths[st]) skip = conv_bn(h, p + ".proj.conv", p + ".proj.bn", stride);
        h = g.relu(g.add(y, skip));
        in = s.widths[st];
      }
    }
    return g.linear(g.global_avg_pool(h), var("spatial.fc.weight"), var("spatial.fc.bias"));
  }

  NodeId temporal(NodeId seq) {
    const auto& t = params.config.temporal;
    const std::size_t h = t.hidden;
    std::vector<NodeId> inputs;
    for (int step = 0; step < t.steps; ++step) inputs.push_back(g.time_step(seq, step));

    for (int l = 0; l < t.layers; ++l) {
      const auto p = "temporal.l" + std::to_string(l + 1);
      const NodeId w_ih = var(p + ".w_ih"), w_hh = var(p + ".w_hh"), bias = var(p + ".bias");
      std::vector<NodeId> outputs;
      NodeId hs{}, cs{};
      for (std::size_t step = 0; step < inputs.size(); ++step) {
        NodeId gates = g.linear(inputs[step], w_ih, bias);
        if (step > 0) gates = g.add(gates, g.matmul(hs, w_hh));
        const NodeId i = g.sigmoid(g.slice_cols(gates, 0, h));
        const NodeId f = g.sigmoid(g.slice_cols(gates, h, h));
        const NodeId c_hat = g.tanh(g.slice_cols(gates, 2 * h, h));
        const NodeId o = g.sigmoid(g.slice_cols(gates, 3 * h, h));
        cs = step > 0 ? g.add(g.mul(f, cs), g.mul(i, c_hat)) : g.mul(i, c_hat);
        hs = g.mul(o, g.tanh(cs));
        outputs.push_back(hs);
      }
      inputs = std::move(outputs);
    }
    return g.linear(inputs.back(), var("temporal.fc.weight"), var("temporal.fc.bias"));
  }

  NodeId head(NodeId features, Rng* rng) {
    Rng unused(0);
    NodeId x = g.dropout(features, params.config.dropout_p, mode, rng ? *rng : unused);
    if (mode == Mode::Train && params.config.dropout_p > 0 && !rng) {
      throw ConfigError("train-mode dropout needs a random generator");
    }
    return g.linear(x, var("head.weight"), var("head.bias"));
  }
};

Prediction to_prediction(const double* logits, const double* probs, int classes) {
  Prediction p;
  p.logits.assign(logits, logits + classes);
  p.probabilities.assign(probs, probs + classes);
  const auto best = std::max_element(p.probabilities.begin(), p.probabilities.end());
  p.predicted = data::class_from_index(static_cast<int>(best - p.probabilities.begin()));
  return p;
}

}  // namespace

BatchInputs make_batch(const std::vector<const Image*>& apex, const std::vector<const Grid*>& adm,
                       std::vector<int> labels) {
  BatchInputs b;
  if (!apex.empty()) {
    const auto s = static_cast<std::size_t>(apex.front()->rows());
    std::vector<double> data;
    data.reserve(apex.size() * s * s);
    for (const auto* img : apex) {
      if (static_cast<std::size_t>(img->rows()) != s || static_cast<std::size_t>(img->cols()) != s) {
        throw ShapeError("make_batch: apex images must all be square and the same size");
      }
      data.insert(data.end(), img->values().begin(), img->values().end());
    }
    b.apex = Tensor({apex.size(), 1, s, s}, std::move(data));
  }
  if (!adm.empty()) {
    const auto rows = static_cast<std::size_t>(adm.front()->rows());
    const auto cols = static_cast<std::size_t>(adm.front()->cols());
    std::vector<double> data;
    data.reserve(adm.size() * rows * cols);
    for (const auto* f : adm) {
      if (static_cast<std::size_t>(f->rows()) != rows || static_cast<std::size_t>(f->cols()) != cols) {
        throw ShapeError("make_batch: feature matrices differ in shape");
      }
      data.insert(data.end(), f->values().begin(), f->values().end());
    }
    b.adm = Tensor({adm.size(), rows, cols}, std::move(data));
  }
  if (!apex.empty() && !adm.empty() && apex.size() != adm.size()) {
    throw ShapeError("make_batch: apex and feature counts differ");
  }
  b.labels = std::move(labels);
  return b;
}

ad::Bindings NetworkGraph::bindings(const ModelParams& params, const BatchInputs& batch) const {
  ad::Bindings out;
  for (const auto& spec : params.specs) {
    if (spec.trainable()) out.emplace(spec.name, params.at(spec.name));
  }
  if (spatial_embedding) out.emplace(kApexInput, batch.apex);
  if (temporal_embedding) out.emplace(kAdmInput, batch.adm);
  return out;
}

NetworkGraph build_network(const ModelParams& params, std::size_t batch, Mode mode, Rng* dropout_rng,
                           const std::vector<int>* labels) {
  const auto& cfg = params.config;
  NetworkGraph net;
  Builder b{params, net.graph, mode, net.batch_norms};
  auto& g = net.graph;

  std::optional<NodeId> s_norm, t_norm;
  if (params.mode != StreamMode::Temporal) {
    const auto size = static_cast<std::size_t>(cfg.spatial.input_size);
    const NodeId x = g.variable(kApexInput, {batch, 1, size, size}, false);
    net.spatial_embedding = b.spatial(x);
    s_norm = g.l2_normalize_rows(*net.spatial_embedding);
  }
  if (params.mode != StreamMode::Spatial) {
    const NodeId x = g.variable(
        kAdmInput, {batch, static_cast<std::size_t>(cfg.temporal.steps), static_cast<std::size_t>(cfg.temporal.input_dim)},
        false);
    net.temporal_embedding = b.temporal(x);
    t_norm = g.l2_normalize_rows(*net.temporal_embedding);
  }
  NodeId features = s_norm && t_norm ? g.concat_cols(*s_norm, *t_norm) : (s_norm ? *s_norm : *t_norm);
  net.logits = b.head(features, dropout_rng);
  net.probabilities = g.softmax_rows(net.logits);
  g.set_output(net.probabilities);
  if (labels) {
    if (labels->size() != batch) throw ShapeError("build_network: label count differs from batch size");
    net.loss = g.softmax_cross_entropy(net.logits, *labels);
    g.set_output(*net.loss);
  }
  return net;
}

void update_running_stats(ModelParams& params, const NetworkGraph& net) {
  const double m = params.config.bn_momentum;
  for (const auto& [prefix, node] : net.batch_norms) {
    const auto& mean = net.graph.batch_mean(node);
    const auto& var = net.graph.batch_var(node);
    auto& rm = params.at(prefix + ".running_mean");
    auto& rv = params.at(prefix + ".running_var");
    for (std::size_t i = 0; i < rm.size(); ++i) {
      rm[i] = m * rm[i] + (1.0 - m) * mean[i];
      rv[i] = m * rv[i] + (1.0 - m) * var[i];
    }
  }
}

std::vector<double> spatial_forward(const Image& apex, const ModelParams& params, Mode mode) {
  if (params.mode == StreamMode::Temporal) throw ConfigError("spatial_forward: model has no spatial stream");
  const int s = params.config.spatial.input_size;
  if (apex.rows() != s || apex.cols() != s) {
    throw ShapeError("spatial_forward: expected " + std::to_string(s) + "x" + std::to_string(s) + " image, got " +
                     std::to_string(apex.rows()) + "x" + std::to_string(apex.cols()));
  }
  NetworkGraph net;
  Builder b{params, net.graph, mode, net.batch_norms};
  const auto size = static_cast<std::size_t>(s);
  const NodeId x = net.graph.variable(kApexInput, {1, 1, size, size}, false);
  net.spatial_embedding = b.spatial(x);
  auto bindings = net.bindings(params, make_batch({&apex}, {}));
  return net.graph.forward(bindings).values();
}

std::vector<double> temporal_forward(const Grid& feature, const ModelParams& params, Mode mode) {
  if (params.mode == StreamMode::Spatial) throw ConfigError("temporal_forward: model has no temporal stream");
  const auto& t = params.config.temporal;
  if (feature.rows() != t.steps || feature.cols() != t.input_dim) {
    throw ShapeError("temporal_forward: expected " + std::to_string(t.steps) + "x" + std::to_string(t.input_dim) +
                     " feature, got " + std::to_string(feature.rows()) + "x" + std::to_string(feature.cols()));
  }
  NetworkGraph net;
  Builder b{params, net.graph, mode, net.batch_norms};
  const NodeId x = net.graph.variable(
      kAdmInput, {1, static_cast<std::size_t>(t.steps), static_cast<std::size_t>(t.input_dim)}, false);
  net.temporal_embedding = b.temporal(x);
  auto bindings = net.bindings(params, make_batch({}, {&feature}));
  return net.graph.forward(bindings).values();
}

std::vector<double> l2_normalize(const std::vector<double>& v) {
  if (v.empty()) return v;
  ad::Graph g;
  const NodeId x = g.variable("v", {1, v.size()}, false);
  g.l2_normalize_rows(x);
  ad::Bindings in;
  in.emplace("v", Tensor({1, v.size()}, v));
  return g.forward(in).values();
}

Prediction fuse_classify(const std::vector<double>& spatial_emb, const std::vector<double>& temporal_emb,
                         const ModelParams& params, Mode mode, Rng* rng) {
  if (params.mode != StreamMode::Fusion) throw ConfigError("fuse_classify: model is not a fusion model");
  const auto d = static_cast<std::size_t>(params.config.embed_dim);
  if (spatial_emb.size() != d || temporal_emb.size() != d) {
    throw ShapeError("fuse_classify: embeddings must have length " + std::to_string(d) + ", got " +
                     std::to_string(spatial_emb.size()) + " and " + std::to_string(temporal_emb.size()));
  }
  NetworkGraph net;
  Builder b{params, net.graph, mode, net.batch_norms};
  auto& g = net.graph;
  const NodeId s = g.variable("embedding.spatial", {1, d}, false);
  const NodeId t = g.variable("embedding.temporal", {1, d}, false);
  net.logits = b.head(g.concat_cols(g.l2_normalize_rows(s), g.l2_normalize_rows(t)), rng);
  net.probabilities = g.softmax_rows(net.logits);

  ad::Bindings in;
  in.emplace("embedding.spatial", Tensor({1, d}, spatial_emb));
  in.emplace("embedding.temporal", Tensor({1, d}, temporal_emb));
  in.emplace("head.weight", params.at("head.weight"));
  in.emplace("head.bias", params.at("head.bias"));
  g.forward(in);
  const int classes = params.config.classes;
  return to_prediction(g.value(net.logits).values().data(), g.value(net.probabilities).values().data(), classes);
}

std::vector<Prediction> predict(const ModelParams& params, const BatchInputs& batch) {
  const std::size_t n = batch.size();
  auto net = build_network(params, n, Mode::Eval, nullptr);
  net.graph.forward(net.bindings(params, batch));
  const int classes = params.config.classes;
  const auto& logits = net.graph.value(net.logits).values();
  const auto& probs = net.graph.value(net.probabilities).values();
  std::vector<Prediction> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(to_prediction(&logits[i * classes], &probs[i * classes], classes));
  return out;
}

}  // namespace atnet::model
