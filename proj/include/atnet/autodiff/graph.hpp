#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "atnet/autodiff/tensor.hpp"
#include "atnet/common/random.hpp"

namespace atnet::ad {

struct NodeId {
  std::uint32_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

enum class Op : std::uint8_t {
  Variable,
  Constant,
  Add,
  Sub,
  Mul,
  Scale,
  Square,
  Sigmoid,
  Tanh,
  Relu,
  Sum,
  Mean,
  MatMul,
  Linear,
  Conv2d,
  BatchNorm,
  GlobalAvgPool,
  SliceCols,
  TimeStep,
  ConcatCols,
  L2NormalizeRows,
  Dropout,
  SoftmaxRows,
  SoftmaxCrossEntropy,
};

const char* op_name(Op op);

enum class Mode { Train, Eval };

using Bindings = std::map<std::string, Tensor, std::less<>>;
using Gradients = std::map<std::string, Tensor, std::less<>>;

/// Static computation graph with reverse-mode differentiation.
///
/// Nodes are appended in topological order by the builder methods, which
/// also infer and validate shapes. Leaves are either named variables,
/// bound on every forward(), or constants captured at build time. The
/// root is the last node added unless set_output() says otherwise.
///
/// A graph may be re-run with different bindings; dropout masks are drawn
/// once at build time, so repeated forwards are deterministic.
class Graph {
 public:
  NodeId variable(std::string name, Shape shape, bool requires_grad = true);
  NodeId constant(Tensor value);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId square(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId relu(NodeId a);
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);

  /// [m,k] x [k,n] -> [m,n]
  NodeId matmul(NodeId a, NodeId b);
  /// x[N,in], weight[out,in], bias[out] -> x * weight^T + bias, [N,out]
  NodeId linear(NodeId x, NodeId weight, NodeId bias);
  /// x[N,C,H,W], weight[O,C,K,K] -> [N,O,H',W'], zero padding, no bias.
  NodeId conv2d(NodeId x, NodeId weight, int stride, int padding);
  /// Per-channel normalisation over every axis but 1. Train mode uses the
  /// batch statistics (readable afterwards via batch_mean/batch_var); eval
  /// mode uses the supplied running statistics.
  NodeId batch_norm(NodeId x, NodeId gamma, NodeId beta, Mode mode, Tensor running_mean,
                    Tensor running_var, double eps = 1e-5);
  /// [N,C,H,W] -> [N,C]
  NodeId global_avg_pool(NodeId x);
  /// [N,F] -> [N,length] starting at column offset.
  NodeId slice_cols(NodeId x, std::size_t offset, std::size_t length);
  /// [N,T,F] -> [N,F] at step t.
  NodeId time_step(NodeId sequence, std::size_t t);
  /// [N,p], [N,q] -> [N,p+q]
  NodeId concat_cols(NodeId a, NodeId b);
  /// Each row divided by its L2 norm; rows with norm below 1e-12 pass through.
  NodeId l2_normalize_rows(NodeId x);
  /// Inverted dropout. Eval mode (or p == 0) returns x itself.
  NodeId dropout(NodeId x, double p, Mode mode, Rng& rng);
  NodeId softmax_rows(NodeId x);
  /// Mean over rows of -log softmax(logits)[label]; output shape {1}.
  NodeId softmax_cross_entropy(NodeId logits, std::vector<int> labels);

  void set_output(NodeId id);
  NodeId output() const;

  /// Binds every variable by name, evaluates all nodes, returns the root.
  const Tensor& forward(const Bindings& inputs);
  /// Reverse sweep from a scalar root. Returns gradients for every
  /// variable created with requires_grad.
  Gradients backward();

  const Tensor& value(NodeId id) const;
  const Tensor& grad(NodeId id) const;
  const Shape& shape(NodeId id) const;
  Op op(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  bool has_forward() const { return forwarded_; }

  const Tensor& batch_mean(NodeId batch_norm_node) const;
  const Tensor& batch_var(NodeId batch_norm_node) const;

  /// Names of variables, in creation order.
  std::vector<std::string> variable_names(bool trainable_only = false) const;

 private:
  struct Node {
    Op op = Op::Constant;
    std::vector<NodeId> inputs;
    Shape shape;
    Tensor value;
    Tensor grad;
    bool needs_grad = false;

    std::string name;           // variables
    bool requires_grad = false; // variables
    int stride = 1;             // conv2d
    int padding = 0;            // conv2d
    std::size_t offset = 0;     // slice_cols, time_step
    std::size_t length = 0;     // slice_cols
    double factor = 0.0;        // scale, batch-norm eps
    Mode mode = Mode::Train;    // batch_norm
    std::vector<int> labels;    // cross-entropy
    Tensor aux_a;               // dropout mask | bn running mean | saved probabilities | row norms
    Tensor aux_b;               // bn running var
    Tensor saved;               // bn normalised input
    Tensor stat_mean;           // bn batch / used mean
    Tensor stat_inv_std;        // bn inverse std in use
    Tensor stat_var;            // bn batch variance
  };

  NodeId push(Node node);
  const Node& at(NodeId id) const;
  Node& at(NodeId id);
  [[noreturn]] void shape_fail(Op op, const std::string& detail) const;
  NodeId elementwise(Op op, NodeId a, NodeId b);
  NodeId unary(Op op, NodeId a, Shape out);

  void eval_node(Node& node);
  void backprop_node(Node& node);

  std::vector<Node> nodes_;
  std::uint32_t output_ = 0;
  bool output_set_ = false;
  bool forwarded_ = false;
};

}  // namespace atnet::ad
