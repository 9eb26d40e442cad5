#include "atnet/model/params.hpp"

#include <cmath>

#include "atnet/common/binary_io.hpp"
#include "atnet/common/error.hpp"
#include "atnet/common/random.hpp"

namespace atnet::model {

namespace {

using ad::Shape;
using ad::Tensor;
using std::size_t;

void add_bn(std::vector<ParamSpec>& out, const std::string& prefix, int ch) {
  const Shape s{static_cast<size_t>(ch)};
  out.push_back({prefix + ".gamma", s, ParamKind::BnGamma});
  out.push_back({prefix + ".beta", s, ParamKind::BnBeta});
  out.push_back({prefix + ".running_mean", s, ParamKind::BnRunningMean});
  out.push_back({prefix + ".running_var", s, ParamKind::BnRunningVar});
}

void add_conv(std::vector<ParamSpec>& out, const std::string& name, int oc, int ic, int k) {
  out.push_back({name, Shape{size_t(oc), size_t(ic), size_t(k), size_t(k)}, ParamKind::Conv});
}

void add_linear(std::vector<ParamSpec>& out, const std::string& prefix, int outputs, int inputs) {
  out.push_back({prefix + ".weight", Shape{size_t(outputs), size_t(inputs)}, ParamKind::LinearWeight});
  out.push_back({prefix + ".bias", Shape{size_t(outputs)}, ParamKind::LinearBias});
}

// Modified Gram-Schmidt on the columns of a Gaussian n x n matrix.
std::vector<double> random_orthogonal(int n, Rng& rng) {
  std::vector<double> q(static_cast<size_t>(n) * n);
  for (auto& v : q) v = standard_normal(rng);
  auto col = [&](int j, int i) -> double& { return q[static_cast<size_t>(i) * n + j]; };
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < j; ++k) {
      double dot = 0;
      for (int i = 0; i < n; ++i) dot += col(k, i) * col(j, i);
      for (int i = 0; i < n; ++i) col(j, i) -= dot * col(k, i);
    }
    double norm = 0;
    for (int i = 0; i < n; ++i) norm += col(j, i) * col(j, i);
    norm = std::sqrt(norm);
    for (int i = 0; i < n; ++i) col(j, i) /= norm;
  }
  return q;
}

}  // namespace

std::vector<ParamSpec> param_specs(const ModelConfig& config, StreamMode mode) {
  config.validate();
  std::vector<ParamSpec> out;
  const int d = config.embed_dim;

  if (mode != StreamMode::Temporal) {
    const auto& s = config.spatial;
    add_conv(out, "spatial.stem.conv", s.widths[0], 1, s.stem_kernel);
    add_bn(out, "spatial.stem.bn", s.widths[0]);
    int in = s.widths[0];
    for (size_t st = 0; st < s.widths.size(); ++st) {
      const int w = s.widths[st];
      for (int b = 0; b < s.blocks_per_stage; ++b) {
        const int stride = b == 0 ? s.strides[st] : 1;
        const auto p = "spatial.s" + std::to_string(st + 1) + ".b" + std::to_string(b + 1);
        add_conv(out, p + ".conv1", w, in, 3);
        add_bn(out, p + ".bn1", w);
        add_conv(out, p + ".conv2", w, w, 3);
        add_bn(out, p + ".bn2", w);
        if (stride != 1 || in != w) {
          add_conv(out, p + ".proj.conv", w, in, 1);
          add_bn(out, p + ".proj.bn", w);
        }
        in = w;
      }
    }
    add_linear(out, "spatial.fc", d, in);
  }

  if (mode != StreamMode::Spatial) {
    const auto& t = config.temporal;
    const size_t h = t.hidden;
    int in = t.input_dim;
    for (int l = 0; l < t.layers; ++l) {
      const auto p = "temporal.l" + std::to_string(l + 1);
      out.push_back({p + ".w_ih", Shape{4 * h, size_t(in)}, ParamKind::LstmInput});
      out.push_back({p + ".w_hh", Shape{h, 4 * h}, ParamKind::LstmRecurrent});
      out.push_back({p + ".bias", Shape{4 * h}, ParamKind::LstmBias});
      in = t.hidden;
    }
    add_linear(out, "temporal.fc", d, t.hidden);
  }

  add_linear(out, "head", config.classes, config.head_inputs(mode));
  return out;
}

const ad::Tensor& ModelParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw Error("model has no parameter '" + name + "'");
  return it->second;
}

ad::Tensor& ModelParams::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw Error("model has no parameter '" + name + "'");
  return it->second;
}

std::uint64_t ModelParams::checksum() const {
  ByteWriter w;
  for (const auto& spec : specs)
    for (double v : at(spec.name).values()) w.f64(v);
  return fnv1a64(w.buffer());
}

std::size_t ModelParams::trainable_count() const {
  std::size_t n = 0;
  for (const auto& spec : specs)
    if (spec.trainable()) n += ad::shape_size(spec.shape);
  return n;
}

ModelParams init_params(const ModelConfig& config, StreamMode mode, std::uint64_t seed) {
  ModelParams p;
  p.config = config;
  p.mode = mode;
  p.specs = param_specs(config, mode);
  Rng rng(seed);

  for (const auto& spec : p.specs) {
    Tensor t(spec.shape);
    auto& v = t.values();
    switch (spec.kind) {
      case ParamKind::Conv: {
        const double fan_in = static_cast<double>(spec.shape[1] * spec.shape[2] * spec.shape[3]);
        const double sd = std::sqrt(2.0 / fan_in);
        for (auto& x : v) x = sd * standard_normal(rng);
        break;
      }
      case ParamKind::BnGamma:
      case ParamKind::BnRunningVar: t.fill(1.0); break;
      case ParamKind::BnBeta:
      case ParamKind::BnRunningMean:
      case ParamKind::LinearBias: break;
      case ParamKind::LinearWeight:
      case ParamKind::LstmInput: {
        const double a = 1.0 / std::sqrt(static_cast<double>(spec.shape[1]));
        for (auto& x : v) x = uniform(rng, -a, a);
        break;
      }
      case ParamKind::LstmRecurrent: {
        const int h = static_cast<int>(spec.shape[0]);
        for (int g = 0; g < 4; ++g) {
          const auto q = random_orthogonal(h, rng);
          for (int r = 0; r < h; ++r)
            for (int c = 0; c < h; ++c) v[static_cast<size_t>(r) * 4 * h + g * h + c] = q[static_cast<size_t>(r) * h + c];
        }
        break;
      }
      case ParamKind::LstmBias: {
        const size_t h = spec.shape[0] / 4;
        for (size_t i = h; i < 2 * h; ++i) v[i] = 1.0;
        break;
      }
    }
    p.tensors.emplace(spec.name, std::move(t));
  }
  return p;
}

}  // namespace atnet::model
