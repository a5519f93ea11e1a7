#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dualseq/autodiff/tensor.hpp"

namespace dualseq::ad {

using TokenId = std::int32_t;

enum class OpKind : std::uint8_t {
  Parameter,
  Constant,
  MatMul,
  Add,
  Sub,
  Mul,
  Sigmoid,
  Tanh,
  Concat,
  AddBias,
  Gather,
  Where,
  RowStack,
  SumSquaredDiff,
  CrossEntropy,
};

const char* op_name(OpKind kind);

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Define-by-run reverse-mode tape. Nodes are appended in evaluation order, so
/// every node's inputs have smaller ids and insertion order is a topological
/// order. A graph is confined to one thread.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Binds a parameter as a differentiable leaf. Binding the same parameter
  /// twice returns the same node, so its gradient is accumulated once.
  Var param(Parameter& p);

  /// Leaf without gradient. `frozen` caches by address like `param`.
  Var constant(Tensor value);
  Var frozen(const Parameter& p);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() loss w.r.t. this node (zeros if unreached).
  Tensor grad(Var v) const;
  OpKind kind(Var v) const;
  std::span<const std::size_t> inputs(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a scalar loss. Node gradients are recomputed from
  /// scratch; bound Parameters have the result *added* to their `grad`.
  void backward(Var loss);

 private:
  friend Var matmul(Var, Var);
  friend Var add(Var, Var);
  friend Var sub(Var, Var);
  friend Var mul(Var, Var);
  friend Var sigmoid(Var);
  friend Var tanh(Var);
  friend Var concat(Var, Var);
  friend Var add_bias(Var, Var);
  friend Var gather_rows(Var, std::span<const TokenId>);
  friend Var where_rows(std::span<const std::uint8_t>, Var, Var);
  friend Var row_stack(std::span<const Var>);
  friend Var sum_squared_diff(Var, Var);
  friend Var cross_entropy(Var, std::span<const TokenId>, std::span<const double>);

  struct Node {
    Node(OpKind k, std::vector<std::size_t> in, Tensor v) : kind(k), inputs(std::move(in)), value(std::move(v)) {}

    OpKind kind;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    Parameter* param = nullptr;
    // Op-specific saved state: row indices / targets, masks, softmax rows.
    std::vector<TokenId> indices;
    std::vector<double> saved;
  };

  Var push(Node node);
  Node& node(Var v);
  const Node& node(Var v) const;
  Tensor& grad_slot(std::size_t id);
  void propagate(std::size_t id);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> bound_;
  std::unordered_map<const Parameter*, std::size_t> frozen_;
};

// ---- operations -----------------------------------------------------------
// All operands must belong to the same graph.

/// [m x k] * [k x n] -> [m x n].
Var matmul(Var a, Var b);

/// Pointwise ops. Binary ops require equal shapes, or one operand scalar.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var sigmoid(Var a);
Var tanh(Var a);

enum class Elementwise { Add, Sub, Mul, Sigmoid, Tanh };
Var elementwise(Elementwise op, Var a, std::optional<Var> b = std::nullopt);

/// Concatenation along the last axis: [m]++[n] -> [m+n], [B x m]++[B x n] -> [B x (m+n)].
Var concat(Var a, Var b);

/// [B x n] + bias[n] added to every row.
Var add_bias(Var a, Var bias);

/// Row lookup: table[V x E], ids (length B) -> [B x E]. Backward scatters.
Var gather_rows(Var table, std::span<const TokenId> ids);

/// Row select: out row r = mask[r] ? a row r : b row r. Shapes equal.
Var where_rows(std::span<const std::uint8_t> mask, Var a, Var b);

/// Stacks rank-2 blocks with equal column count vertically.
Var row_stack(std::span<const Var> parts);

/// Squared Euclidean distance. Rank-1: sum (a-b)^2. Rank-2 [B x D]: mean over
/// the B rows of each row's squared distance.
Var sum_squared_diff(Var a, Var b);

/// Masked mean negative log-likelihood over rows of logits[R x V]:
/// sum_r mask[r] * -log softmax(logits[r])[targets[r]] / sum_r mask[r].
Var cross_entropy(Var logits, std::span<const TokenId> targets, std::span<const double> mask);

}  // namespace dualseq::ad
