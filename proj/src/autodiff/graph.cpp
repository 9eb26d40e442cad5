#include "atnet/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>

#include "atnet/common/error.hpp"

namespace atnet::ad {

namespace {

constexpr double kNormGuard = 1e-12;

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Output column range [lo, hi) for which j*stride + k - pad lands in [0, extent).
std::pair<int, int> valid_range(int out_extent, int in_extent, int stride, int k, int pad) {
  int lo = 0;
  while (lo < out_extent && lo * stride + k - pad < 0) ++lo;
  int hi = out_extent;
  while (hi > lo && (hi - 1) * stride + k - pad >= in_extent) --hi;
  return {lo, hi};
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::Variable: return "variable";
    case Op::Constant: return "constant";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::Square: return "square";
    case Op::Sigmoid: return "sigmoid";
    case Op::Tanh: return "tanh";
    case Op::Relu: return "relu";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::MatMul: return "matmul";
    case Op::Linear: return "linear";
    case Op::Conv2d: return "conv2d";
    case Op::BatchNorm: return "batch_norm";
    case Op::GlobalAvgPool: return "global_avg_pool";
    case Op::SliceCols: return "slice_cols";
    case Op::TimeStep: return "time_step";
    case Op::ConcatCols: return "concat_cols";
    case Op::L2NormalizeRows: return "l2_normalize_rows";
    case Op::Dropout: return "dropout";
    case Op::SoftmaxRows: return "softmax_rows";
    case Op::SoftmaxCrossEntropy: return "softmax_cross_entropy";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Builders

NodeId Graph::push(Node node) {
  node.needs_grad = node.op == Op::Variable
                        ? node.requires_grad
                        : std::ranges::any_of(node.inputs, [&](NodeId in) { return at(in).needs_grad; });
  nodes_.push_back(std::move(node));
  forwarded_ = false;
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Graph::Node& Graph::at(NodeId id) const {
  if (id.index >= nodes_.size()) throw Error("node id " + std::to_string(id.index) + " out of range");
  return nodes_[id.index];
}

Graph::Node& Graph::at(NodeId id) {
  if (id.index >= nodes_.size()) throw Error("node id " + std::to_string(id.index) + " out of range");
  return nodes_[id.index];
}

void Graph::shape_fail(Op op, const std::string& detail) const {
  throw ShapeError("node " + std::to_string(nodes_.size()) + " (" + op_name(op) + "): " + detail);
}

NodeId Graph::variable(std::string name, Shape shape, bool requires_grad) {
  if (shape.empty() || shape_size(shape) == 0) shape_fail(Op::Variable, "invalid shape for '" + name + "'");
  Node n;
  n.op = Op::Variable;
  n.name = std::move(name);
  n.shape = std::move(shape);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
  Node n;
  n.op = Op::Constant;
  n.shape = value.shape();
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::elementwise(Op op, NodeId a, NodeId b) {
  if (at(a).shape != at(b).shape) {
    shape_fail(op, "operand shapes differ: " + shape_string(at(a).shape) + " vs " +
                       shape_string(at(b).shape));
  }
  Node n;
  n.op = op;
  n.inputs = {a, b};
  n.shape = at(a).shape;
  return push(std::move(n));
}

NodeId Graph::unary(Op op, NodeId a, Shape out) {
  Node n;
  n.op = op;
  n.inputs = {a};
  n.shape = std::move(out);
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) { return elementwise(Op::Add, a, b); }
NodeId Graph::sub(NodeId a, NodeId b) { return elementwise(Op::Sub, a, b); }
NodeId Graph::mul(NodeId a, NodeId b) { return elementwise(Op::Mul, a, b); }

NodeId Graph::scale(NodeId a, double factor) {
  Node n;
  n.op = Op::Scale;
  n.inputs = {a};
  n.shape = at(a).shape;
  n.factor = factor;
  return push(std::move(n));
}

NodeId Graph::square(NodeId a) { return unary(Op::Square, a, at(a).shape); }
NodeId Graph::sigmoid(NodeId a) { return unary(Op::Sigmoid, a, at(a).shape); }
NodeId Graph::tanh(NodeId a) { return unary(Op::Tanh, a, at(a).shape); }
NodeId Graph::relu(NodeId a) { return unary(Op::Relu, a, at(a).shape); }
NodeId Graph::sum(NodeId a) { return unary(Op::Sum, a, {1}); }
NodeId Graph::mean(NodeId a) { return unary(Op::Mean, a, {1}); }

NodeId Graph::matmul(NodeId a, NodeId b) {
  const auto& sa = at(a).shape;
  const auto& sb = at(b).shape;
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    shape_fail(Op::MatMul, "cannot multiply " + shape_string(sa) + " by " + shape_string(sb));
  }
  Node n;
  n.op = Op::MatMul;
  n.inputs = {a, b};
  n.shape = {sa[0], sb[1]};
  return push(std::move(n));
}

NodeId Graph::linear(NodeId x, NodeId weight, NodeId bias) {
  const auto& sx = at(x).shape;
  const auto& sw = at(weight).shape;
  const auto& sb = at(bias).shape;
  if (sx.size() != 2 || sw.size() != 2 || sx[1] != sw[1] || sb != Shape{sw[0]}) {
    shape_fail(Op::Linear, "input " + shape_string(sx) + ", weight " + shape_string(sw) + ", bias " +
                               shape_string(sb));
  }
  Node n;
  n.op = Op::Linear;
  n.inputs = {x, weight, bias};
  n.shape = {sx[0], sw[0]};
  return push(std::move(n));
}

NodeId Graph::conv2d(NodeId x, NodeId weight, int stride, int padding) {
  const auto& sx = at(x).shape;
  const auto& sw = at(weight).shape;
  if (sx.size() != 4 || sw.size() != 4 || sx[1] != sw[1] || sw[2] != sw[3]) {
    shape_fail(Op::Conv2d, "input " + shape_string(sx) + " incompatible with weight " + shape_string(sw));
  }
  if (stride < 1 || padding < 0) shape_fail(Op::Conv2d, "stride must be >= 1 and padding >= 0");
  const long k = static_cast<long>(sw[2]);
  const long ho = (static_cast<long>(sx[2]) + 2 * padding - k) / stride + 1;
  const long wo = (static_cast<long>(sx[3]) + 2 * padding - k) / stride + 1;
  if (ho < 1 || wo < 1) shape_fail(Op::Conv2d, "kernel larger than padded input " + shape_string(sx));
  Node n;
  n.op = Op::Conv2d;
  n.inputs = {x, weight};
  n.shape = {sx[0], sw[0], static_cast<std::size_t>(ho), static_cast<std::size_t>(wo)};
  n.stride = stride;
  n.padding = padding;
  return push(std::move(n));
}

NodeId Graph::batch_norm(NodeId x, NodeId gamma, NodeId beta, Mode mode, Tensor running_mean,
                         Tensor running_var, double eps) {
  const auto& sx = at(x).shape;
  if (sx.size() < 2) shape_fail(Op::BatchNorm, "input must have a channel axis, got " + shape_string(sx));
  const Shape ch{sx[1]};
  if (at(gamma).shape != ch || at(beta).shape != ch) {
    shape_fail(Op::BatchNorm, "gamma/beta must have shape " + shape_string(ch));
  }
  if (mode == Mode::Eval && (running_mean.shape() != ch || running_var.shape() != ch)) {
    shape_fail(Op::BatchNorm, "running statistics must have shape " + shape_string(ch));
  }
  Node n;
  n.op = Op::BatchNorm;
  n.inputs = {x, gamma, beta};
  n.shape = sx;
  n.mode = mode;
  n.factor = eps;
  n.aux_a = std::move(running_mean);
  n.aux_b = std::move(running_var);
  return push(std::move(n));
}

NodeId Graph::global_avg_pool(NodeId x) {
  const auto& sx = at(x).shape;
  if (sx.size() != 4) shape_fail(Op::GlobalAvgPool, "expects [N,C,H,W], got " + shape_string(sx));
  return unary(Op::GlobalAvgPool, x, {sx[0], sx[1]});
}

NodeId Graph::slice_cols(NodeId x, std::size_t offset, std::size_t length) {
  const auto& sx = at(x).shape;
  if (sx.size() != 2 || length == 0 || offset + length > sx[1]) {
    shape_fail(Op::SliceCols, "columns [" + std::to_string(offset) + "," + std::to_string(offset + length) +
                                  ") out of range for " + shape_string(sx));
  }
  Node n;
  n.op = Op::SliceCols;
  n.inputs = {x};
  n.shape = {sx[0], length};
  n.offset = offset;
  n.length = length;
  return push(std::move(n));
}

NodeId Graph::time_step(NodeId sequence, std::size_t t) {
  const auto& sx = at(sequence).shape;
  if (sx.size() != 3 || t >= sx[1]) {
    shape_fail(Op::TimeStep, "step " + std::to_string(t) + " out of range for " + shape_string(sx));
  }
  Node n;
  n.op = Op::TimeStep;
  n.inputs = {sequence};
  n.shape = {sx[0], sx[2]};
  n.offset = t;
  return push(std::move(n));
}

NodeId Graph::concat_cols(NodeId a, NodeId b) {
  const auto& sa = at(a).shape;
  const auto& sb = at(b).shape;
  if (sa.size() != 2 || sb.size() != 2 || sa[0] != sb[0]) {
    shape_fail(Op::ConcatCols, "cannot concatenate " + shape_string(sa) + " and " + shape_string(sb));
  }
  Node n;
  n.op = Op::ConcatCols;
  n.inputs = {a, b};
  n.shape = {sa[0], sa[1] + sb[1]};
  return push(std::move(n));
}

NodeId Graph::l2_normalize_rows(NodeId x) {
  const auto& sx = at(x).shape;
  if (sx.size() != 2) shape_fail(Op::L2NormalizeRows, "expects [N,D], got " + shape_string(sx));
  return unary(Op::L2NormalizeRows, x, sx);
}

NodeId Graph::dropout(NodeId x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) shape_fail(Op::Dropout, "probability must lie in [0,1)");
  if (mode == Mode::Eval || p == 0.0) return x;
  Node n;
  n.op = Op::Dropout;
  n.inputs = {x};
  n.shape = at(x).shape;
  n.aux_a = Tensor(n.shape);
  const double keep_scale = 1.0 / (1.0 - p);
  for (auto& m : n.aux_a.values()) m = uniform01(rng) < p ? 0.0 : keep_scale;
  return push(std::move(n));
}

NodeId Graph::softmax_rows(NodeId x) {
  const auto& sx = at(x).shape;
  if (sx.size() != 2) shape_fail(Op::SoftmaxRows, "expects [N,K], got " + shape_string(sx));
  return unary(Op::SoftmaxRows, x, sx);
}

NodeId Graph::softmax_cross_entropy(NodeId logits, std::vector<int> labels) {
  const auto& sx = at(logits).shape;
  if (sx.size() != 2 || labels.size() != sx[0]) {
    shape_fail(Op::SoftmaxCrossEntropy,
               "logits " + shape_string(sx) + " with " + std::to_string(labels.size()) + " labels");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= sx[1]) {
      shape_fail(Op::SoftmaxCrossEntropy, "label " + std::to_string(l) + " out of range");
    }
  }
  Node n;
  n.op = Op::SoftmaxCrossEntropy;
  n.inputs = {logits};
  n.shape = {1};
  n.labels = std::move(labels);
  return push(std::move(n));
}

void Graph::set_output(NodeId id) {
  at(id);
  output_ = id.index;
  output_set_ = true;
}

NodeId Graph::output() const {
  if (nodes_.empty()) throw Error("empty graph has no output");
  return NodeId{output_set_ ? output_ : static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Graph::value(NodeId id) const {
  if (!forwarded_) throw Error("value requested before forward");
  return at(id).value;
}

const Tensor& Graph::grad(NodeId id) const { return at(id).grad; }
const Shape& Graph::shape(NodeId id) const { return at(id).shape; }
Op Graph::op(NodeId id) const { return at(id).op; }

const Tensor& Graph::batch_mean(NodeId id) const {
  const auto& n = at(id);
  if (n.op != Op::BatchNorm || !forwarded_) throw Error("batch_mean needs a forwarded batch_norm node");
  return n.stat_mean;
}

const Tensor& Graph::batch_var(NodeId id) const {
  const auto& n = at(id);
  if (n.op != Op::BatchNorm || !forwarded_) throw Error("batch_var needs a forwarded batch_norm node");
  return n.stat_var;
}

std::vector<std::string> Graph::variable_names(bool trainable_only) const {
  std::vector<std::string> names;
  for (const auto& n : nodes_) {
    if (n.op == Op::Variable && (!trainable_only || n.requires_grad)) names.push_back(n.name);
  }
  return names;
}

// ---------------------------------------------------------------------------
// Forward

const Tensor& Graph::forward(const Bindings& inputs) {
  if (nodes_.empty()) throw Error("forward on an empty graph");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.op == Op::Variable) {
      auto it = inputs.find(n.name);
      if (it == inputs.end()) {
        throw Error("node " + std::to_string(i) + " (variable): '" + n.name + "' is not bound");
      }
      if (it->second.shape() != n.shape) {
        throw ShapeError("node " + std::to_string(i) + " (variable '" + n.name + "'): bound shape " +
                         shape_string(it->second.shape()) + " but declared " + shape_string(n.shape));
      }
      n.value = it->second;
    } else if (n.op != Op::Constant) {
      eval_node(n);
    }
  }
  forwarded_ = true;
  return nodes_[output().index].value;
}

void Graph::eval_node(Node& n) {
  if (n.value.shape() != n.shape) n.value = Tensor(n.shape);
  auto& out = n.value.values();
  auto in = [&](std::size_t k) -> const std::vector<double>& { return nodes_[n.inputs[k].index].value.values(); };
  auto in_shape = [&](std::size_t k) -> const Shape& { return nodes_[n.inputs[k].index].shape; };

  switch (n.op) {
    case Op::Variable:
    case Op::Constant:
      break;
    case Op::Add: {
      const auto& a = in(0);
      const auto& b = in(1);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
      break;
    }
    case Op::Sub: {
      const auto& a = in(0);
      const auto& b = in(1);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
      break;
    }
    case Op::Mul: {
      const auto& a = in(0);
      const auto& b = in(1);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
      break;
    }
    case Op::Scale: {
      const auto& a = in(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * n.factor;
      break;
    }
    case Op::Square: {
      const auto& a = in(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * a[i];
      break;
    }
    case Op::Sigmoid: {
      const auto& a = in(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(a[i]);
      break;
    }
    case Op::Tanh: {
      const auto& a = in(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a[i]);
      break;
    }
    case Op::Relu: {
      const auto& a = in(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
      break;
    }
    case Op::Sum: {
      double s = 0.0;
      for (double v : in(0)) s += v;
      out[0] = s;
      break;
    }
    case Op::Mean: {
      double s = 0.0;
      for (double v : in(0)) s += v;
      out[0] = s / static_cast<double>(in(0).size());
      break;
    }
    case Op::MatMul: {
      const auto& a = in(0);
      const auto& b = in(1);
      const std::size_t m = in_shape(0)[0], k = in_shape(0)[1], cols = in_shape(1)[1];
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = a[i * k + p];
          const double* brow = &b[p * cols];
          double* orow = &out[i * cols];
          for (std::size_t j = 0; j < cols; ++j) orow[j] += av * brow[j];
        }
      }
      break;
    }
    case Op::Linear: {
      const auto& x = in(0);
      const auto& w = in(1);
      const auto& b = in(2);
      const std::size_t rows = in_shape(0)[0], fan_in = in_shape(0)[1], fan_out = in_shape(1)[0];
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = &x[r * fan_in];
        for (std::size_t o = 0; o < fan_out; ++o) {
          const double* wr = &w[o * fan_in];
          double s = b[o];
          for (std::size_t i = 0; i < fan_in; ++i) s += xr[i] * wr[i];
          out[r * fan_out + o] = s;
        }
      }
      break;
    }
    case Op::Conv2d: {
      const auto& x = in(0);
      const auto& w = in(1);
      const auto& sx = in_shape(0);
      const int batch = static_cast<int>(sx[0]), ch = static_cast<int>(sx[1]);
      const int h = static_cast<int>(sx[2]), wd = static_cast<int>(sx[3]);
      const int oc = static_cast<int>(n.shape[1]), ho = static_cast<int>(n.shape[2]),
                wo = static_cast<int>(n.shape[3]);
      const int k = static_cast<int>(in_shape(1)[2]);
      const int s = n.stride, p = n.padding;
      std::fill(out.begin(), out.end(), 0.0);
      for (int b = 0; b < batch; ++b) {
        for (int o = 0; o < oc; ++o) {
          double* oplane = &out[(static_cast<std::size_t>(b) * oc + o) * ho * wo];
          for (int c = 0; c < ch; ++c) {
            const double* xplane = &x[(static_cast<std::size_t>(b) * ch + c) * h * wd];
            const double* wk = &w[(static_cast<std::size_t>(o) * ch + c) * k * k];
            for (int ki = 0; ki < k; ++ki) {
              const auto [ilo, ihi] = valid_range(ho, h, s, ki, p);
              for (int kj = 0; kj < k; ++kj) {
                const double wv = wk[ki * k + kj];
                const auto [jlo, jhi] = valid_range(wo, wd, s, kj, p);
                for (int i = ilo; i < ihi; ++i) {
                  const double* xrow = xplane + static_cast<std::size_t>(i * s + ki - p) * wd + (kj - p);
                  double* orow = oplane + static_cast<std::size_t>(i) * wo;
                  if (s == 1) {
                    for (int j = jlo; j < jhi; ++j) orow[j] += wv * xrow[j];
                  } else {
                    for (int j = jlo; j < jhi; ++j) orow[j] += wv * xrow[j * s];
                  }
                }
              }
            }
          }
        }
      }
      break;
    }
    case Op::BatchNorm: {
      const auto& x = in(0);
      const auto& gamma = in(1);
      const auto& beta = in(2);
      const std::size_t batch = n.shape[0], ch = n.shape[1];
      const std::size_t inner = shape_size(n.shape) / (batch * ch);
      const double count = static_cast<double>(batch * inner);
      n.stat_mean = Tensor({ch});
      n.stat_var = Tensor({ch});
      n.stat_inv_std = Tensor({ch});
      if (n.saved.shape() != n.shape) n.saved = Tensor(n.shape);
      auto& xhat = n.saved.values();
      for (std::size_t c = 0; c < ch; ++c) {
        double mu, var;
        if (n.mode == Mode::Train) {
          double s = 0.0;
          for (std::size_t b = 0; b < batch; ++b) {
            const double* p = &x[(b * ch + c) * inner];
            for (std::size_t i = 0; i < inner; ++i) s += p[i];
          }
          mu = s / count;
          double ss = 0.0;
          for (std::size_t b = 0; b < batch; ++b) {
            const double* p = &x[(b * ch + c) * inner];
            for (std::size_t i = 0; i < inner; ++i) ss += (p[i] - mu) * (p[i] - mu);
          }
          var = ss / count;
        } else {
          mu = n.aux_a[c];
          var = n.aux_b[c];
        }
        const double inv_std = 1.0 / std::sqrt(var + n.factor);
        n.stat_mean[c] = mu;
        n.stat_var[c] = var;
        n.stat_inv_std[c] = inv_std;
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t base = (b * ch + c) * inner;
          for (std::size_t i = 0; i < inner; ++i) {
            const double xh = (x[base + i] - mu) * inv_std;
            xhat[base + i] = xh;
            out[base + i] = gamma[c] * xh + beta[c];
          }
        }
      }
      break;
    }
    case Op::GlobalAvgPool: {
      const auto& x = in(0);
      const std::size_t planes = n.shape[0] * n.shape[1];
      const std::size_t inner = in_shape(0)[2] * in_shape(0)[3];
      for (std::size_t q = 0; q < planes; ++q) {
        double s = 0.0;
        for (std::size_t i = 0; i < inner; ++i) s += x[q * inner + i];
        out[q] = s / static_cast<double>(inner);
      }
      break;
    }
    case Op::SliceCols: {
      const auto& x = in(0);
      const std::size_t rows = n.shape[0], width = in_shape(0)[1];
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(&x[r * width + n.offset], n.length, &out[r * n.length]);
      }
      break;
    }
    case Op::TimeStep: {
      const auto& x = in(0);
      const std::size_t rows = in_shape(0)[0], steps = in_shape(0)[1], feat = in_shape(0)[2];
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(&x[(r * steps + n.offset) * feat], feat, &out[r * feat]);
      }
      break;
    }
    case Op::ConcatCols: {
      const auto& a = in(0);
      const auto& b = in(1);
      const std::size_t rows = n.shape[0], pa = in_shape(0)[1], pb = in_shape(1)[1];
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(&a[r * pa], pa, &out[r * (pa + pb)]);
        std::copy_n(&b[r * pb], pb, &out[r * (pa + pb) + pa]);
      }
      break;
    }
    case Op::L2NormalizeRows: {
      const auto& x = in(0);
      const std::size_t rows = n.shape[0], d = n.shape[1];
      n.aux_a = Tensor({rows});
      for (std::size_t r = 0; r < rows; ++r) {
        double ss = 0.0;
        for (std::size_t i = 0; i < d; ++i) ss += x[r * d + i] * x[r * d + i];
        const double norm = std::sqrt(ss);
        n.aux_a[r] = norm;
        for (std::size_t i = 0; i < d; ++i) {
          out[r * d + i] = norm < kNormGuard ? x[r * d + i] : x[r * d + i] / norm;
        }
      }
      break;
    }
    case Op::Dropout: {
      const auto& x = in(0);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * n.aux_a[i];
      break;
    }
    case Op::SoftmaxRows: {
      const auto& x = in(0);
      const std::size_t rows = n.shape[0], k = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = &x[r * k];
        const double mx = *std::max_element(xr, xr + k);
        double z = 0.0;
        for (std::size_t i = 0; i < k; ++i) z += std::exp(xr[i] - mx);
        for (std::size_t i = 0; i < k; ++i) out[r * k + i] = std::exp(xr[i] - mx) / z;
      }
      break;
    }
    case Op::SoftmaxCrossEntropy: {
      const auto& x = in(0);
      const std::size_t rows = in_shape(0)[0], k = in_shape(0)[1];
      n.aux_a = Tensor(in_shape(0));
      double loss = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = &x[r * k];
        const double mx = *std::max_element(xr, xr + k);
        double z = 0.0;
        for (std::size_t i = 0; i < k; ++i) z += std::exp(xr[i] - mx);
        const double lse = mx + std::log(z);
        loss += lse - xr[n.labels[r]];
        for (std::size_t i = 0; i < k; ++i) n.aux_a[r * k + i] = std::exp(xr[i] - lse);
      }
      out[0] = loss / static_cast<double>(rows);
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Backward

Gradients Graph::backward() {
  if (!forwarded_) throw Error("backward called before forward");
  const auto root = output();
  if (nodes_[root.index].value.size() != 1) {
    throw ShapeError("backward needs a scalar root, got shape " + shape_string(nodes_[root.index].shape));
  }
  for (auto& n : nodes_) {
    if (n.grad.shape() != n.shape) {
      n.grad = Tensor(n.shape);
    } else {
      n.grad.fill(0.0);
    }
  }
  nodes_[root.index].grad[0] = 1.0;
  for (std::size_t i = root.index + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.needs_grad || n.op == Op::Variable || n.op == Op::Constant) continue;
    backprop_node(n);
  }
  Gradients out;
  for (const auto& n : nodes_) {
    if (n.op == Op::Variable && n.requires_grad) out.insert_or_assign(n.name, n.grad);
  }
  return out;
}

void Graph::backprop_node(Node& n) {
  const auto& g = n.grad.values();
  const auto& y = n.value.values();
  auto input = [&](std::size_t k) -> Node& { return nodes_[n.inputs[k].index]; };
  auto want = [&](std::size_t k) { return input(k).needs_grad; };

  switch (n.op) {
    case Op::Variable:
    case Op::Constant:
      break;
    case Op::Add:
      for (std::size_t k = 0; k < 2; ++k) {
        if (!want(k)) continue;
        auto& gi = input(k).grad.values();
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
      break;
    case Op::Sub:
      if (want(0)) {
        auto& gi = input(0).grad.values();
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
      }
      if (want(1)) {
        auto& gi = input(1).grad.values();
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] -= g[i];
      }
      break;
    case Op::Mul: {
      const auto& a = input(0).value.values();
      const auto& b = input(1).value.values();
      if (want(0)) {
        auto& gi = input(0).grad.values();
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * b[i];
      }
      if (want(1)) {
        auto& gi = input(1).grad.values();
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * a[i];
      }
      break;
    }
    case Op::Scale: {
      auto& gi = input(0).grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * n.factor;
      break;
    }
    case Op::Square: {
      const auto& a = input(0).value.values();
      auto& gi = input(0).grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += 2.0 * a[i] * g[i];
      break;
    }
    case Op::Sigmoid: {
      auto& gi = input(0).grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * y[i] * (1.0 - y[i]);
      break;
    }
    case Op::Tanh: {
      auto& gi = input(0).grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i] * (1.0 - y[i] * y[i]);
      break;
    }
    case Op::Relu: {
      const auto& a = input(0).value.values();
      auto& gi = input(0).grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (a[i] > 0.0) gi[i] += g[i];
      }
      break;
    }
    case Op::Sum: {
      for (auto& v : input(0).grad.values()) v += g[0];
      break;
    }
    case Op::Mean: {
      auto& gi = input(0).grad.values();
      const double share = g[0] / static_cast<double>(gi.size());
      for (auto& v : gi) v += share;
      break;
    }
    case Op::MatMul: {
      const auto& a = input(0).value.values();
      const auto& b = input(1).value.values();
      const std::size_t m = input(0).shape[0], k = input(0).shape[1], cols = input(1).shape[1];
      if (want(0)) {
        auto& ga = input(0).grad.values();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += g[i * cols + j] * b[p * cols + j];
            ga[i * k + p] += s;
          }
      }
      if (want(1)) {
        auto& gb = input(1).grad.values();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            for (std::size_t j = 0; j < cols; ++j) gb[p * cols + j] += av * g[i * cols + j];
          }
      }
      break;
    }
    case Op::Linear: {
      const auto& x = input(0).value.values();
      const auto& w = input(1).value.values();
      const std::size_t rows = input(0).shape[0], fan_in = input(0).shape[1], fan_out = input(1).shape[0];
      if (want(0)) {
        auto& gx = input(0).grad.values();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t o = 0; o < fan_out; ++o) {
            const double go = g[r * fan_out + o];
            if (go == 0.0) continue;
            const double* wr = &w[o * fan_in];
            double* gxr = &gx[r * fan_in];
            for (std::size_t i = 0; i < fan_in; ++i) gxr[i] += go * wr[i];
          }
      }
      if (want(1)) {
        auto& gw = input(1).grad.values();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t o = 0; o < fan_out; ++o) {
            const double go = g[r * fan_out + o];
            if (go == 0.0) continue;
            const double* xr = &x[r * fan_in];
            double* gwr = &gw[o * fan_in];
            for (std::size_t i = 0; i < fan_in; ++i) gwr[i] += go * xr[i];
          }
      }
      if (want(2)) {
        auto& gb = input(2).grad.values();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t o = 0; o < fan_out; ++o) gb[o] += g[r * fan_out + o];
      }
      break;
    }
    case Op::Conv2d: {
      const auto& x = input(0).value.values();
      const auto& w = input(1).value.values();
      const auto& sx = input(0).shape;
      const int batch = static_cast<int>(sx[0]), ch = static_cast<int>(sx[1]);
      const int h = static_cast<int>(sx[2]), wd = static_cast<int>(sx[3]);
      const int oc = static_cast<int>(n.shape[1]), ho = static_cast<int>(n.shape[2]),
                wo = static_cast<int>(n.shape[3]);
      const int k = static_cast<int>(input(1).shape[2]);
      const int s = n.stride, p = n.padding;
      const bool gx_needed = want(0), gw_needed = want(1);
      double* gx = gx_needed ? input(0).grad.values().data() : nullptr;
      double* gw = gw_needed ? input(1).grad.values().data() : nullptr;
      for (int b = 0; b < batch; ++b) {
        for (int o = 0; o < oc; ++o) {
          const double* gplane = &g[(static_cast<std::size_t>(b) * oc + o) * ho * wo];
          for (int c = 0; c < ch; ++c) {
            const std::size_t xoff = (static_cast<std::size_t>(b) * ch + c) * h * wd;
            const std::size_t woff = (static_cast<std::size_t>(o) * ch + c) * k * k;
            for (int ki = 0; ki < k; ++ki) {
              const auto [ilo, ihi] = valid_range(ho, h, s, ki, p);
              for (int kj = 0; kj < k; ++kj) {
                const auto [jlo, jhi] = valid_range(wo, wd, s, kj, p);
                const double wv = w[woff + ki * k + kj];
                double acc = 0.0;
                for (int i = ilo; i < ihi; ++i) {
                  const std::size_t row = xoff + static_cast<std::size_t>(i * s + ki - p) * wd + (kj - p);
                  const double* grow = gplane + static_cast<std::size_t>(i) * wo;
                  if (gw_needed) {
                    for (int j = jlo; j < jhi; ++j) acc += grow[j] * x[row + static_cast<std::size_t>(j) * s];
                  }
                  if (gx_needed) {
                    for (int j = jlo; j < jhi; ++j) gx[row + static_cast<std::size_t>(j) * s] += wv * grow[j];
                  }
                }
                if (gw_needed) gw[woff + ki * k + kj] += acc;
              }
            }
          }
        }
      }
      break;
    }
    case Op::BatchNorm: {
      const auto& gamma = input(1).value.values();
      const auto& xhat = n.saved.values();
      const std::size_t batch = n.shape[0], ch = n.shape[1];
      const std::size_t inner = shape_size(n.shape) / (batch * ch);
      const double count = static_cast<double>(batch * inner);
      for (std::size_t c = 0; c < ch; ++c) {
        double sum_g = 0.0, sum_gx = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t base = (b * ch + c) * inner;
          for (std::size_t i = 0; i < inner; ++i) {
            sum_g += g[base + i];
            sum_gx += g[base + i] * xhat[base + i];
          }
        }
        if (want(1)) input(1).grad[c] += sum_gx;
        if (want(2)) input(2).grad[c] += sum_g;
        if (!want(0)) continue;
        auto& gx = input(0).grad.values();
        const double scale = gamma[c] * n.stat_inv_std[c];
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t base = (b * ch + c) * inner;
          for (std::size_t i = 0; i < inner; ++i) {
            if (n.mode == Mode::Train) {
              gx[base + i] += scale / count * (count * g[base + i] - sum_g - xhat[base + i] * sum_gx);
            } else {
              gx[base + i] += scale * g[base + i];
            }
          }
        }
      }
      break;
    }
    case Op::GlobalAvgPool: {
      auto& gx = input(0).grad.values();
      const std::size_t planes = n.shape[0] * n.shape[1];
      const std::size_t inner = input(0).shape[2] * input(0).shape[3];
      for (std::size_t q = 0; q < planes; ++q) {
        const double share = g[q] / static_cast<double>(inner);
        for (std::size_t i = 0; i < inner; ++i) gx[q * inner + i] += share;
      }
      break;
    }
    case Op::SliceCols: {
      auto& gx = input(0).grad.values();
      const std::size_t rows = n.shape[0], width = input(0).shape[1];
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < n.length; ++i) gx[r * width + n.offset + i] += g[r * n.length + i];
      break;
    }
    case Op::TimeStep: {
      auto& gx = input(0).grad.values();
      const std::size_t rows = input(0).shape[0], steps = input(0).shape[1], feat = input(0).shape[2];
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < feat; ++i) gx[(r * steps + n.offset) * feat + i] += g[r * feat + i];
      break;
    }
    case Op::ConcatCols: {
      const std::size_t rows = n.shape[0], pa = input(0).shape[1], pb = input(1).shape[1];
      if (want(0)) {
        auto& ga = input(0).grad.values();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = 0; i < pa; ++i) ga[r * pa + i] += g[r * (pa + pb) + i];
      }
      if (want(1)) {
        auto& gb = input(1).grad.values();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = 0; i < pb; ++i) gb[r * pb + i] += g[r * (pa + pb) + pa + i];
      }
      break;
    }
    case Op::L2NormalizeRows: {
      auto& gx = input(0).grad.values();
      const std::size_t rows = n.shape[0], d = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r) {
        const double norm = n.aux_a[r];
        if (norm < kNormGuard) {
          for (std::size_t i = 0; i < d; ++i) gx[r * d + i] += g[r * d + i];
          continue;
        }
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += y[r * d + i] * g[r * d + i];
        for (std::size_t i = 0; i < d; ++i) gx[r * d + i] += (g[r * d + i] - y[r * d + i] * dot) / norm;
      }
      break;
    }
    case Op::Dropout: {
      auto& gx = input(0).grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * n.aux_a[i];
      break;
    }
    case Op::SoftmaxRows: {
      auto& gx = input(0).grad.values();
      const std::size_t rows = n.shape[0], k = n.shape[1];
      for (std::size_t r = 0; r < rows; ++r) {
        double dot = 0.0;
        for (std::size_t i = 0; i < k; ++i) dot += g[r * k + i] * y[r * k + i];
        for (std::size_t i = 0; i < k; ++i) gx[r * k + i] += y[r * k + i] * (g[r * k + i] - dot);
      }
      break;
    }
    case Op::SoftmaxCrossEntropy: {
      auto& gx = input(0).grad.values();
      const std::size_t rows = input(0).shape[0], k = input(0).shape[1];
      const double share = g[0] / static_cast<double>(rows);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < k; ++i) {
          const double target = static_cast<int>(i) == n.labels[r] ? 1.0 : 0.0;
          gx[r * k + i] += share * (n.aux_a[r * k + i] - target);
        }
      break;
    }
  }
}

}  // namespace atnet::ad
